#include "mmray/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mmray/errors.hpp"

namespace mmray {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

double fspl_db(double distance_m, double frequency_ghz) {
    if (!(distance_m > 0.0) || !(frequency_ghz > 0.0))
        throw std::invalid_argument("fspl requires positive distance and frequency");
    return 20.0 * std::log10(4.0 * kPi * distance_m * frequency_ghz * 1e9 / kSpeedOfLight);
}

AntennaPattern AntennaPattern::make_isotropic(double gain_dbi) {
    AntennaPattern p;
    p.boresight_gain_dbi = gain_dbi;
    p.isotropic = true;
    return p;
}

AntennaPattern AntennaPattern::make_directional(double gain_dbi, double hpbw_az_deg,
                                                double hpbw_el_deg, double floor_db) {
    if (!(hpbw_az_deg > 0.0) || !(hpbw_el_deg > 0.0))
        throw std::invalid_argument("antenna half-power beamwidths must be positive");
    if (!(floor_db <= 0.0)) throw std::invalid_argument("sidelobe floor must be <= 0 dB");
    AntennaPattern p;
    p.boresight_gain_dbi = gain_dbi;
    p.hpbw_az_deg = hpbw_az_deg;
    p.hpbw_el_deg = hpbw_el_deg;
    p.floor_db = floor_db;
    p.isotropic = false;
    return p;
}

double antenna_gain_dbi(const AntennaPattern& pattern, const Angles& pointing,
                        const Angles& direction) {
    if (pattern.isotropic) return pattern.boresight_gain_dbi;
    const double az = pointing.azimuth_deg * kDegToRad;
    const double el = pointing.elevation_deg * kDegToRad;
    const Vec3 forward = angles_direction(pointing);
    const Vec3 left{-std::sin(az), std::cos(az), 0.0};
    const Vec3 up{-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el)};
    const Vec3 d = angles_direction(direction);
    const double off_az = std::atan2(dot(d, left), dot(d, forward)) * kRadToDeg;
    const double off_el = std::asin(std::clamp(dot(d, up), -1.0, 1.0)) * kRadToDeg;
    const double rolloff = 12.0 * (std::pow(off_az / pattern.hpbw_az_deg, 2) +
                                   std::pow(off_el / pattern.hpbw_el_deg, 2));
    return pattern.boresight_gain_dbi - std::min(rolloff, -pattern.floor_db);
}

double angular_offset_deg(const Angles& a, const Angles& b) {
    return angle_between(angles_direction(a), angles_direction(b)) * kRadToDeg;
}

double time_of_flight_ns(double length_m) { return length_m / kSpeedOfLight * 1e9; }

double scattering_loss_db(double coefficient, double lobe_exponent, double rebound_angle_deg) {
    if (!(coefficient > 0.0)) throw UncalibratedInteraction("scattering coefficient is zero");
    const double lobe = std::max((1.0 + std::cos(rebound_angle_deg * kDegToRad)) / 2.0, 1e-12);
    return -20.0 * std::log10(coefficient) - 10.0 * lobe_exponent * std::log10(lobe);
}

double interaction_loss_db(const PropagationPath& path, const MaterialLibrary& lib,
                           double frequency_ghz) {
    double total = 0.0;
    for (const Interaction& it : path.interactions) {
        const Material& m = lib.lookup(it.material_id, frequency_ghz);
        switch (it.kind) {
            case InteractionKind::reflection:
                if (!m.reflection_loss_db)
                    throw UncalibratedInteraction("no reflection loss for '" + m.name + "'");
                total += *m.reflection_loss_db;
                break;
            case InteractionKind::penetration:
                if (!m.penetration_loss_db)
                    throw UncalibratedInteraction("no penetration loss for '" + m.name + "'");
                total += *m.penetration_loss_db;
                break;
            case InteractionKind::scattering:
                total += scattering_loss_db(m.scattering_coefficient, m.scattering_lobe_exponent,
                                            it.rebound_angle_deg);
                break;
        }
    }
    return total;
}

MultipathComponent path_power(const PropagationPath& path, const MaterialLibrary& lib,
                              const LinkBudget& budget) {
    MultipathComponent mpc;
    mpc.power_dbm = budget.ptx_dbm +
                    antenna_gain_dbi(budget.tx_pattern, budget.tx_pointing, path.aod) +
                    antenna_gain_dbi(budget.rx_pattern, budget.rx_pointing, path.aoa) -
                    fspl_db(path.length_m, budget.frequency_ghz) -
                    interaction_loss_db(path, lib, budget.frequency_ghz);
    mpc.tof_ns = time_of_flight_ns(path.length_m);
    mpc.aoa = path.aoa;
    mpc.aod = path.aod;
    mpc.path = path;
    return mpc;
}

std::vector<MultipathComponent> path_powers(std::span<const PropagationPath> paths,
                                            const MaterialLibrary& lib, const LinkBudget& budget) {
    std::vector<MultipathComponent> out;
    out.reserve(paths.size());
    for (const PropagationPath& p : paths) out.push_back(path_power(p, lib, budget));
    return out;
}

MultipathComponent strongest_directional_mpc(std::span<const PropagationPath> paths,
                                             const MaterialLibrary& lib,
                                             const LinkBudget& budget) {
    if (paths.empty()) throw std::invalid_argument("no paths to select from");
    std::optional<MultipathComponent> best;
    for (const PropagationPath& p : paths) {
        MultipathComponent mpc = path_power(p, lib, budget);
        if (!best || mpc.power_dbm > best->power_dbm ||
            (mpc.power_dbm == best->power_dbm && mpc.tof_ns < best->tof_ns))
            best = std::move(mpc);
    }
    return *best;
}

PowerDelayProfile synthesize_pdp(std::span<const MultipathComponent> mpcs, double bandwidth_ghz,
                                 double threshold_db) {
    if (mpcs.empty()) throw std::invalid_argument("cannot build a PDP from zero components");
    if (!(bandwidth_ghz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    PowerDelayProfile pdp;
    pdp.bin_width_ns = 1.0 / bandwidth_ghz;
    pdp.threshold_db = threshold_db;

    std::map<long long, double> bins;
    for (const MultipathComponent& m : mpcs) {
        const auto index = static_cast<long long>(std::floor(m.tof_ns / pdp.bin_width_ns));
        bins[index] += dbm_to_mw(m.power_dbm);
    }
    double peak = 0.0;
    for (const auto& [index, mw] : bins) peak = std::max(peak, mw);
    const double floor_mw = peak * std::pow(10.0, -threshold_db / 10.0);
    for (const auto& [index, mw] : bins)
        if (mw >= floor_mw) pdp.bins.push_back({static_cast<double>(index) * pdp.bin_width_ns, mw});
    return pdp;
}

}  // namespace mmray
