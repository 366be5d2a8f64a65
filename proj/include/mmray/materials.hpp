#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmray {

/// Electrical properties of one material in one frequency band. Losses are
/// constant per interaction, independent of the angle of incidence. An absent
/// loss means the interaction type has not been calibrated.
struct Material {
    std::string name;
    double frequency_ghz = 0.0;
    std::string environment;
    std::optional<double> reflection_loss_db;
    std::optional<double> penetration_loss_db;
    double scattering_coefficient = 0.0;    // S in [0, 1]
    double scattering_lobe_exponent = 4.0;  // alpha_R >= 1

    bool operator==(const Material&) const = default;
};

/// Entries are unique per (name, frequency, environment). Lookups by
/// (name, frequency) require that pair to be unambiguous; use
/// select_environment() to narrow a multi-environment catalogue first.
class MaterialLibrary {
  public:
    MaterialLibrary() = default;
    /// Throws std::invalid_argument on duplicates or out-of-range values.
    explicit MaterialLibrary(std::vector<Material> entries);

    const std::vector<Material>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Exact (name, frequency) match. Throws MissingMaterial when absent and
    /// InputError when more than one environment row matches.
    const Material& lookup(std::string_view name, double frequency_ghz) const;
    const Material& lookup(std::string_view name, double frequency_ghz,
                           std::string_view environment) const;

    /// Non-throwing variant of lookup(name, frequency); nullptr when absent or ambiguous.
    const Material* find(std::string_view name, double frequency_ghz) const noexcept;

    MaterialLibrary select_environment(std::string_view environment) const;
    MaterialLibrary at_frequency(double frequency_ghz) const;

    /// Replace the entry with the same (name, frequency, environment) or append.
    void upsert(Material m);

    bool operator==(const MaterialLibrary&) const = default;

  private:
    std::vector<Material> entries_;
};

void validate_material(const Material& m);

bool same_frequency(double a_ghz, double b_ghz);

/// Per-material losses recovered by ray-tracer calibration against directional
/// channel measurements at 28, 73 and 140 GHz (indoor office, outdoor, factory).
MaterialLibrary reference_library();

}  // namespace mmray
