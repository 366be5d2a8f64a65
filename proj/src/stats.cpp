#include "mmray/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmray {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;
constexpr double kDegToRad = kPi / 180.0;

void require_nonempty(std::size_t n) {
    if (n == 0) throw std::invalid_argument("statistics need at least one component");
}

double delay_moment(std::span<const double> delays, std::span<const double> powers) {
    double p = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < delays.size(); ++k) {
        p += powers[k];
        m1 += powers[k] * delays[k];
    }
    const double mean = m1 / p;
    // Central form avoids cancellation for large common offsets.
    double m2 = 0.0;
    for (std::size_t k = 0; k < delays.size(); ++k)
        m2 += powers[k] * (delays[k] - mean) * (delays[k] - mean);
    return std::sqrt(std::max(0.0, m2 / p));
}

double azimuth_deg(const MultipathComponent& m, AngleSide side) {
    return (side == AngleSide::aoa ? m.aoa : m.aod).azimuth_deg;
}

}  // namespace

double rms_delay_spread_ns(std::span<const MultipathComponent> mpcs) {
    require_nonempty(mpcs.size());
    std::vector<double> d, p;
    for (const MultipathComponent& m : mpcs) {
        d.push_back(m.tof_ns);
        p.push_back(dbm_to_mw(m.power_dbm));
    }
    return delay_moment(d, p);
}

double rms_delay_spread_ns(const PowerDelayProfile& pdp) {
    require_nonempty(pdp.bins.size());
    std::vector<double> d, p;
    for (const PdpBin& b : pdp.bins) {
        d.push_back(b.delay_ns);
        p.push_back(b.power_mw);
    }
    return delay_moment(d, p);
}

double angular_spread_deg(std::span<const MultipathComponent> mpcs, AngleSide side) {
    require_nonempty(mpcs.size());
    // Azimuths are taken relative to the strongest tap, reduced exactly in
    // degrees, and 1 - R^2 is accumulated from half-angle sines so that small
    // spreads and rotated inputs keep full precision.
    const auto strongest = std::max_element(
        mpcs.begin(), mpcs.end(),
        [](const MultipathComponent& a, const MultipathComponent& b) { return a.power_dbm < b.power_dbm; });
    const double ref = azimuth_deg(*strongest, side);
    double total = 0.0, d = 0.0, sn = 0.0;
    for (const MultipathComponent& m : mpcs) {
        const double p = dbm_to_mw(m.power_dbm);
        const double delta = std::remainder(azimuth_deg(m, side) - ref, 360.0) * kDegToRad;
        const double half = std::sin(0.5 * delta);
        total += p;
        d += 2.0 * p * half * half;  // p (1 - cos delta)
        sn += p * std::sin(delta);
    }
    // R^2 P^2 = (P - d)^2 + sn^2
    const double one_minus_r2 = std::clamp((d * (2.0 * total - d) - sn * sn) / (total * total), 0.0, 1.0);
    if (one_minus_r2 == 0.0) return 0.0;
    return std::sqrt(-std::log1p(-one_minus_r2)) * kRadToDeg;
}

double angular_spread_rms_deg(std::span<const MultipathComponent> mpcs, AngleSide side) {
    require_nonempty(mpcs.size());
    std::vector<std::pair<double, double>> taps;  // (azimuth in [0, 2pi), power)
    double total = 0.0;
    for (const MultipathComponent& m : mpcs) {
        double a = std::fmod(azimuth_deg(m, side) * kDegToRad, 2.0 * kPi);
        if (a < 0) a += 2.0 * kPi;
        const double p = dbm_to_mw(m.power_dbm);
        taps.emplace_back(a, p);
        total += p;
    }
    std::sort(taps.begin(), taps.end());
    double best = std::numeric_limits<double>::infinity();
    // Cutting the circle just before tap `start` fixes one unwrapping; the
    // variance is invariant to shifts that do not move the cut.
    for (std::size_t start = 0; start < taps.size(); ++start) {
        double m1 = 0.0;
        std::vector<double> unwrapped(taps.size());
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const auto& [a, p] = taps[(start + k) % taps.size()];
            unwrapped[k] = a + (start + k >= taps.size() ? 2.0 * kPi : 0.0);
            m1 += p * unwrapped[k];
        }
        const double mean = m1 / total;
        double m2 = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const double p = taps[(start + k) % taps.size()].second;
            m2 += p * (unwrapped[k] - mean) * (unwrapped[k] - mean);
        }
        best = std::min(best, std::sqrt(m2 / total));
    }
    return best * kRadToDeg;
}

ChannelStats channel_stats(std::string location_id, std::span<const MultipathComponent> mpcs) {
    require_nonempty(mpcs.size());
    ChannelStats s;
    s.location_id = std::move(location_id);
    s.n_mpcs = mpcs.size();
    double total = 0.0;
    for (const MultipathComponent& m : mpcs) total += dbm_to_mw(m.power_dbm);
    s.total_power_dbm = mw_to_dbm(total);
    s.rms_delay_spread_ns = rms_delay_spread_ns(mpcs);
    s.angular_spread_aoa_deg = angular_spread_deg(mpcs, AngleSide::aoa);
    s.angular_spread_aod_deg = angular_spread_deg(mpcs, AngleSide::aod);
    s.angular_spread_aoa_wrapped_deg = angular_spread_rms_deg(mpcs, AngleSide::aoa);
    s.angular_spread_aod_wrapped_deg = angular_spread_rms_deg(mpcs, AngleSide::aod);
    return s;
}

StatsComparison compare(std::span<const ChannelStats> measured,
                        std::span<const ChannelStats> simulated) {
    if (measured.size() != simulated.size())
        throw std::invalid_argument("measured and simulated statistics differ in length");
    for (std::size_t i = 0; i < measured.size(); ++i)
        if (measured[i].location_id != simulated[i].location_id)
            throw std::invalid_argument("location id mismatch at row " + std::to_string(i + 1) +
                                        ": '" + measured[i].location_id + "' vs '" +
                                        simulated[i].location_id + "'");

    struct Metric {
        const char* name;
        double ChannelStats::*field;
    };
    const Metric metrics[] = {{"rms_ds_ns", &ChannelStats::rms_delay_spread_ns},
                              {"as_aoa_deg", &ChannelStats::angular_spread_aoa_deg},
                              {"as_aod_deg", &ChannelStats::angular_spread_aod_deg}};
    StatsComparison out;
    for (const Metric& metric : metrics) {
        MetricComparison c;
        c.metric = metric.name;
        double rel = 0.0, bias = 0.0, mae = 0.0;
        for (std::size_t i = 0; i < measured.size(); ++i) {
            const double meas = measured[i].*metric.field;
            const double sim = simulated[i].*metric.field;
            bias += sim - meas;
            mae += std::abs(sim - meas);
            if (meas != 0.0) {
                rel += (sim - meas) / meas;
                ++c.pairs;
            }
        }
        if (!measured.empty()) {
            c.bias = bias / static_cast<double>(measured.size());
            c.mean_absolute_error = mae / static_cast<double>(measured.size());
        }
        if (c.pairs > 0) c.mean_relative_error = rel / static_cast<double>(c.pairs);
        out.metrics.push_back(c);
    }
    return out;
}

}  // namespace mmray
