#pragma once

#include <span>
#include <vector>

#include "mmray/materials.hpp"
#include "mmray/tracer.hpp"

namespace mmray {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Friis free-space path loss, 20 log10(4 pi d f / c), for d in meters and f in GHz.
double fspl_db(double distance_m, double frequency_ghz);

/// Gaussian main lobe, 12 (off/hpbw)^2 dB roll-off per axis, clamped at a
/// constant sidelobe floor (`floor_db` relative to boresight).
struct AntennaPattern {
    double boresight_gain_dbi = 0.0;
    double hpbw_az_deg = 360.0;
    double hpbw_el_deg = 360.0;
    double floor_db = -20.0;
    bool isotropic = true;

    static AntennaPattern make_isotropic(double gain_dbi = 0.0);
    static AntennaPattern make_directional(double gain_dbi, double hpbw_az_deg, double hpbw_el_deg,
                                           double floor_db = -20.0);
};

/// Gain towards `direction` for an antenna whose boresight points at `pointing`.
/// The offset is resolved in the antenna frame into azimuth and elevation parts.
double antenna_gain_dbi(const AntennaPattern& pattern, const Angles& pointing,
                        const Angles& direction);

/// Great-circle angle between two directions, degrees.
double angular_offset_deg(const Angles& a, const Angles& b);

struct LinkBudget {
    double frequency_ghz = 28.0;
    double ptx_dbm = 0.0;
    AntennaPattern tx_pattern = AntennaPattern::make_isotropic();
    Angles tx_pointing;
    AntennaPattern rx_pattern = AntennaPattern::make_isotropic();
    Angles rx_pointing;
};

struct MultipathComponent {
    double power_dbm = 0.0;
    double tof_ns = 0.0;
    Angles aoa;
    Angles aod;
    PropagationPath path;
};

double time_of_flight_ns(double length_m);

/// Directive-lobe scattering loss: -20 log10 S - 10 alpha log10((1 + cos psi) / 2).
double scattering_loss_db(double coefficient, double lobe_exponent, double rebound_angle_deg);

/// Sum of material losses along the path (penetration + reflection, or the
/// scattering term). Throws MissingMaterial / UncalibratedInteraction.
double interaction_loss_db(const PropagationPath& path, const MaterialLibrary& lib,
                           double frequency_ghz);

MultipathComponent path_power(const PropagationPath& path, const MaterialLibrary& lib,
                              const LinkBudget& budget);

std::vector<MultipathComponent> path_powers(std::span<const PropagationPath> paths,
                                            const MaterialLibrary& lib, const LinkBudget& budget);

/// Maximum-power component under the budget's pointings; ties go to the smaller delay.
/// Throws std::invalid_argument when `paths` is empty.
MultipathComponent strongest_directional_mpc(std::span<const PropagationPath> paths,
                                             const MaterialLibrary& lib,
                                             const LinkBudget& budget);

struct PdpBin {
    double delay_ns = 0.0;
    double power_mw = 0.0;
};

struct PowerDelayProfile {
    double bin_width_ns = 1.0;
    double threshold_db = 30.0;
    std::vector<PdpBin> bins;  // occupied bins only, ascending delay
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// Bins MPC powers (linear mW) at 1/bandwidth ns resolution, keeping bins
/// within `threshold_db` of the strongest bin.
PowerDelayProfile synthesize_pdp(std::span<const MultipathComponent> mpcs, double bandwidth_ghz,
                                 double threshold_db = 30.0);

}  // namespace mmray
