#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmray/channel.hpp"

namespace mmray {

enum class AngleSide { aoa, aod };

/// Power-weighted second central moment of the delays (powers in mW). Throws on empty input.
double rms_delay_spread_ns(std::span<const MultipathComponent> mpcs);

/// Same moment evaluated on a binned PDP (bin delays as tap positions).
double rms_delay_spread_ns(const PowerDelayProfile& pdp);

/// Circular azimuth spread sqrt(-2 ln R), R the power-weighted resultant
/// length; degrees. Unbounded as R goes to zero.
double angular_spread_deg(std::span<const MultipathComponent> mpcs, AngleSide side);

/// Wrapped RMS azimuth spread: the smallest power-weighted standard deviation
/// over all unwrapping cuts of the circle; degrees, never above ~103.9.
double angular_spread_rms_deg(std::span<const MultipathComponent> mpcs, AngleSide side);

struct ChannelStats {
    std::string location_id;
    std::size_t n_mpcs = 0;
    double total_power_dbm = 0.0;
    double rms_delay_spread_ns = 0.0;
    double angular_spread_aoa_deg = 0.0;
    double angular_spread_aod_deg = 0.0;
    double angular_spread_aoa_wrapped_deg = 0.0;  ///< angular_spread_rms_deg variant
    double angular_spread_aod_wrapped_deg = 0.0;
};

ChannelStats channel_stats(std::string location_id, std::span<const MultipathComponent> mpcs);

struct MetricComparison {
    std::string metric;
    double mean_relative_error = 0.0;  ///< mean of (sim - meas) / meas
    double bias = 0.0;                 ///< mean of (sim - meas)
    double mean_absolute_error = 0.0;
    std::size_t pairs = 0;             ///< pairs with nonzero measured value
};

struct StatsComparison {
    std::vector<MetricComparison> metrics;  ///< rms_ds_ns, as_aoa_deg, as_aod_deg
};

/// Pairwise comparison; throws std::invalid_argument on length or id mismatch.
StatsComparison compare(std::span<const ChannelStats> measured,
                        std::span<const ChannelStats> simulated);

}  // namespace mmray
