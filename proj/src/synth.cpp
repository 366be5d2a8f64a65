#include "mmray/synth.hpp"

#include <cmath>

#include "mmray/log.hpp"

namespace mmray {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

bool in_gates(const PropagationPath& p, const Angles& tx_pointing, const Angles& rx_pointing,
              double tx_gate, double rx_gate) {
    return angular_offset_deg(p.aod, tx_pointing) <= tx_gate &&
           angular_offset_deg(p.aoa, rx_pointing) <= rx_gate;
}

DirectionalMeasurement record(const std::string& id, const SynthLink& link,
                              const SynthConfig& config, const Angles& tx_pointing,
                              const Angles& rx_pointing) {
    DirectionalMeasurement m;
    m.id = id;
    m.tx = link.tx;
    m.rx = link.rx;
    m.frequency_ghz = config.tracer.frequency_ghz;
    m.ptx_dbm = config.ptx_dbm;
    m.tx_pointing = tx_pointing;
    m.rx_pointing = rx_pointing;
    m.tx_gain_dbi = config.tx_antenna.boresight_gain_dbi;
    m.tx_hpbw_deg = config.tx_antenna.hpbw_az_deg;
    m.rx_gain_dbi = config.rx_antenna.boresight_gain_dbi;
    m.rx_hpbw_deg = config.rx_antenna.hpbw_az_deg;
    return m;
}

}  // namespace

double GaussianNoise::uniform() {
    return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianNoise::next() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::vector<DirectionalMeasurement> synthesize_measurements(const EnvironmentMap& env,
                                                            const MaterialLibrary& truth,
                                                            std::span<const SynthLink> links,
                                                            const SynthConfig& config,
                                                            std::uint64_t seed) {
    GaussianNoise noise(seed);
    const double tof_gate = config.tof_gate_ns.value_or(1.0 / config.bandwidth_ghz);
    const double tx_gate = config.angle_gate_deg.value_or(config.tx_antenna.hpbw_az_deg / 2.0);
    const double rx_gate = config.angle_gate_deg.value_or(config.rx_antenna.hpbw_az_deg / 2.0);
    std::vector<DirectionalMeasurement> out;
    std::size_t ambiguous = 0;

    for (const SynthLink& link : links) {
        const std::vector<PropagationPath> paths =
            trace_paths(env, truth, link.tx, link.rx, config.tracer);
        if (paths.empty()) {
            log_warning("link '" + link.id + "' has no propagation path");
            continue;
        }
        auto emit = [&](DirectionalMeasurement m) {
            const MultipathComponent best = strongest_directional_mpc(paths, truth, m.budget());
            m.measured_power_dbm = best.power_dbm + noise.next(config.noise_sigma_db);
            m.measured_tof_ns = best.tof_ns;
            out.push_back(std::move(m));
        };

        if (config.aim == SynthAim::links) {
            const Angles los = direction_angles(normalized(link.rx - link.tx));
            const Angles back = direction_angles(normalized(link.tx - link.rx));
            emit(record(link.id, link, config, link.tx_pointing.value_or(los),
                        link.rx_pointing.value_or(back)));
            continue;
        }
        for (std::size_t k = 0; k < paths.size(); ++k) {
            const PropagationPath& p = paths[k];
            const double tof = time_of_flight_ns(p.length_m);
            std::size_t admitted = 0;
            for (const PropagationPath& q : paths)
                if (in_gates(q, p.aod, p.aoa, tx_gate, rx_gate) &&
                    std::abs(time_of_flight_ns(q.length_m) - tof) <= tof_gate)
                    ++admitted;
            // The pointing also sees paths outside the ToF gate; the strongest
            // of those must still be p for the record to describe it.
            DirectionalMeasurement m = record(link.id + "_p" + std::to_string(k), link, config,
                                              p.aod, p.aoa);
            const MultipathComponent best = strongest_directional_mpc(paths, truth, m.budget());
            if (admitted != 1 || std::abs(best.tof_ns - tof) > 0.0) {
                ++ambiguous;
                continue;
            }
            emit(std::move(m));
        }
    }
    if (ambiguous > 0)
        log_info("skipped " + std::to_string(ambiguous) +
                 " pointing(s) whose gates admit more than one path");
    return out;
}

}  // namespace mmray
