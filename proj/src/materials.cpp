#include "mmray/materials.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mmray/errors.hpp"

namespace mmray {
namespace {

std::string describe(std::string_view name, double f) {
    std::ostringstream os;
    os << "'" << name << "' at " << f << " GHz";
    return os.str();
}

}  // namespace

bool same_frequency(double a_ghz, double b_ghz) { return std::abs(a_ghz - b_ghz) <= 1e-9; }

void validate_material(const Material& m) {
    const std::string who = "material " + describe(m.name, m.frequency_ghz);
    if (m.name.empty()) throw std::invalid_argument("material with empty name");
    if (!(m.frequency_ghz > 0.0) || !std::isfinite(m.frequency_ghz))
        throw std::invalid_argument(who + ": frequency must be positive");
    auto check_loss = [&](const std::optional<double>& loss, const char* what) {
        if (loss && (!std::isfinite(*loss) || *loss < 0.0))
            throw std::invalid_argument(who + ": " + what + " must be finite and >= 0");
    };
    check_loss(m.reflection_loss_db, "reflection loss");
    check_loss(m.penetration_loss_db, "penetration loss");
    if (!(m.scattering_coefficient >= 0.0 && m.scattering_coefficient <= 1.0))
        throw std::invalid_argument(who + ": scattering coefficient must be in [0, 1]");
    if (!(m.scattering_lobe_exponent >= 1.0) || !std::isfinite(m.scattering_lobe_exponent))
        throw std::invalid_argument(who + ": scattering lobe exponent must be >= 1");
}

MaterialLibrary::MaterialLibrary(std::vector<Material> entries) {
    for (Material& m : entries) {
        validate_material(m);
        for (const Material& e : entries_) {
            if (e.name == m.name && same_frequency(e.frequency_ghz, m.frequency_ghz) &&
                e.environment == m.environment)
                throw std::invalid_argument("duplicate material entry " +
                                            describe(m.name, m.frequency_ghz) + " [" +
                                            m.environment + "]");
        }
        entries_.push_back(std::move(m));
    }
}

const Material* MaterialLibrary::find(std::string_view name, double frequency_ghz) const noexcept {
    const Material* found = nullptr;
    for (const Material& m : entries_) {
        if (m.name != name || !same_frequency(m.frequency_ghz, frequency_ghz)) continue;
        if (found) return nullptr;
        found = &m;
    }
    return found;
}

const Material& MaterialLibrary::lookup(std::string_view name, double frequency_ghz) const {
    const Material* found = nullptr;
    int matches = 0;
    for (const Material& m : entries_) {
        if (m.name == name && same_frequency(m.frequency_ghz, frequency_ghz)) {
            found = &m;
            ++matches;
        }
    }
    if (matches == 0)
        throw MissingMaterial(std::string(name), frequency_ghz,
                              "missing material " + describe(name, frequency_ghz));
    if (matches > 1)
        throw InputError("material " + describe(name, frequency_ghz) +
                         " is defined for several environments; select one");
    return *found;
}

const Material& MaterialLibrary::lookup(std::string_view name, double frequency_ghz,
                                        std::string_view environment) const {
    for (const Material& m : entries_) {
        if (m.name == name && same_frequency(m.frequency_ghz, frequency_ghz) &&
            m.environment == environment)
            return m;
    }
    throw MissingMaterial(std::string(name), frequency_ghz,
                          "missing material " + describe(name, frequency_ghz) + " [" +
                              std::string(environment) + "]");
}

MaterialLibrary MaterialLibrary::select_environment(std::string_view environment) const {
    std::vector<Material> out;
    for (const Material& m : entries_)
        if (m.environment == environment) out.push_back(m);
    return MaterialLibrary(std::move(out));
}

MaterialLibrary MaterialLibrary::at_frequency(double frequency_ghz) const {
    std::vector<Material> out;
    for (const Material& m : entries_)
        if (same_frequency(m.frequency_ghz, frequency_ghz)) out.push_back(m);
    return MaterialLibrary(std::move(out));
}

void MaterialLibrary::upsert(Material m) {
    validate_material(m);
    for (Material& e : entries_) {
        if (e.name == m.name && same_frequency(e.frequency_ghz, m.frequency_ghz) &&
            e.environment == m.environment) {
            e = std::move(m);
            return;
        }
    }
    entries_.push_back(std::move(m));
}

}  // namespace mmray
