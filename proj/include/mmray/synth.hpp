#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmray/calibration.hpp"

namespace mmray {

/// Standard normal deviates from a 64-bit Mersenne Twister (std::mt19937_64)
/// through the Box-Muller cosine branch, one deviate per pair of draws:
///   u = 1 - (word >> 11) * 2^-53   (in (0, 1])
///   z = sqrt(-2 ln u1) * cos(2 pi u2)
/// Spelled out so streams are reproducible across standard libraries.
class GaussianNoise {
  public:
    explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}
    double next();
    double next(double sigma) { return sigma * next(); }

  private:
    double uniform();
    std::mt19937_64 engine_;
};

struct SynthLink {
    std::string id;
    Vec3 tx;
    Vec3 rx;
    std::optional<Angles> tx_pointing;  ///< used by SynthAim::links; default is the LOS bearing
    std::optional<Angles> rx_pointing;
};

enum class SynthAim {
    paths,  ///< one record per traced path, both antennas aimed along it
    links,  ///< one record per link at its configured pointing
};

struct SynthConfig {
    TracerConfig tracer;
    double ptx_dbm = 0.0;
    AntennaPattern tx_antenna = AntennaPattern::make_directional(20.0, 10.0, 10.0);
    AntennaPattern rx_antenna = AntennaPattern::make_directional(20.0, 10.0, 10.0);
    double noise_sigma_db = 0.0;
    double bandwidth_ghz = 1.0;
    std::optional<double> tof_gate_ns;     ///< default 1 / bandwidth
    std::optional<double> angle_gate_deg;  ///< default hpbw / 2
    SynthAim aim = SynthAim::paths;
};

/// Directional measurements generated from a ground-truth library. Each record
/// holds the strongest MPC under its pointing plus N(0, sigma^2) dB noise.
/// With SynthAim::paths, pointings whose gates admit more than one path are
/// skipped so every record identifies its path unambiguously.
std::vector<DirectionalMeasurement> synthesize_measurements(const EnvironmentMap& env,
                                                            const MaterialLibrary& truth,
                                                            std::span<const SynthLink> links,
                                                            const SynthConfig& config,
                                                            std::uint64_t seed);

}  // namespace mmray
