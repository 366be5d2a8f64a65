#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmray/calibration.hpp"
#include "mmray/channel.hpp"
#include "mmray/geometry.hpp"
#include "mmray/materials.hpp"
#include "mmray/stats.hpp"
#include "mmray/tracer.hpp"

namespace mmray {

/// Shortest decimal form that parses back to the identical double.
std::string format_number(double value);

// Environment files: {"name", "materials_ref", "facets": [{"id", "material", "vertices"}]}.
// Errors carry "<source>:<line>:" prefixes.
EnvironmentMap parse_environment(const std::string& text, const std::string& source = "<input>");
EnvironmentMap load_environment(const std::filesystem::path& path);
std::string environment_to_json(const EnvironmentMap& env);
void save_environment(const EnvironmentMap& env, const std::filesystem::path& path);

// Material library files: JSON array, absent losses omitted.
MaterialLibrary parse_material_library(const std::string& text,
                                       const std::string& source = "<input>");
MaterialLibrary load_material_library(const std::filesystem::path& path);
std::string material_library_to_json(const MaterialLibrary& lib);
void save_material_library(const MaterialLibrary& lib, const std::filesystem::path& path);

// Measurement CSV.
inline constexpr const char* kMeasurementHeader =
    "id,tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,f_ghz,ptx_dbm,tx_az,tx_el,rx_az,rx_el,tx_gain_dbi,"
    "tx_hpbw_deg,rx_gain_dbi,rx_hpbw_deg,meas_power_dbm,meas_tof_ns";
std::vector<DirectionalMeasurement> parse_measurements_csv(const std::string& text,
                                                           const std::string& source = "<input>");
std::vector<DirectionalMeasurement> load_measurements(const std::filesystem::path& path);
void write_measurements_csv(std::ostream& os, std::span<const DirectionalMeasurement> rows);

// MPC CSV.
inline constexpr const char* kMpcHeader =
    "path_id,power_dbm,tof_ns,aod_az,aod_el,aoa_az,aoa_el,n_reflections,n_penetrations,"
    "n_scatter,interaction_chain";
struct MpcRecord {
    int path_id = 0;
    double power_dbm = 0.0;
    double tof_ns = 0.0;
    Angles aod;
    Angles aoa;
    int n_reflections = 0;
    int n_penetrations = 0;
    int n_scatter = 0;
    std::string interaction_chain;
};
void write_mpc_csv(std::ostream& os, std::span<const MultipathComponent> mpcs);
std::vector<MpcRecord> parse_mpc_csv(const std::string& text, const std::string& source = "<input>");

// PDP CSV.
inline constexpr const char* kPdpHeader = "delay_ns,power_dbm";
void write_pdp_csv(std::ostream& os, const PowerDelayProfile& pdp);
std::vector<std::pair<double, double>> parse_pdp_csv(const std::string& text,
                                                     const std::string& source = "<input>");

// Stats CSV. as_*_deg hold the circular spread; the written file appends the
// wrapped-RMS spreads as two extra columns, which the reader treats as optional.
inline constexpr const char* kStatsHeader =
    "location_id,n_mpcs,total_power_dbm,rms_ds_ns,as_aoa_deg,as_aod_deg";
inline constexpr const char* kStatsWrappedColumns = "as_aoa_wrapped_deg,as_aod_wrapped_deg";
void write_stats_csv(std::ostream& os, std::span<const ChannelStats> rows);
std::vector<ChannelStats> parse_stats_csv(const std::string& text,
                                          const std::string& source = "<input>");
std::vector<ChannelStats> load_stats(const std::filesystem::path& path);

void write_comparison_csv(std::ostream& os, const StatsComparison& cmp);

std::string calibration_report_json(const CalibrationResult& result, double frequency_ghz);
void write_residual_histogram_csv(std::ostream& os, const ResidualStatistics& stats);
void write_residuals_csv(std::ostream& os, const CalibrationResult& result);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

struct LinkSpec {
    std::string id;
    Vec3 tx;
    Vec3 rx;
    std::optional<Angles> tx_pointing;
    std::optional<Angles> rx_pointing;
};

/// Everything a CLI run needs. Paths in the config file are relative to it.
struct RunConfig {
    std::filesystem::path environment;
    std::filesystem::path materials;       ///< empty: the environment's materials_ref
    std::filesystem::path measurements;
    std::filesystem::path true_materials;  ///< synth ground truth
    std::string material_environment;      ///< restrict library rows to this environment tag
    double frequency_ghz = 28.0;
    double bandwidth_ghz = 1.0;
    double ptx_dbm = 0.0;
    double pdp_threshold_db = 30.0;
    TracerConfig tracer;
    bool include_scattering = true;
    AntennaPattern tx_antenna = AntennaPattern::make_isotropic();
    AntennaPattern rx_antenna = AntennaPattern::make_isotropic();
    std::vector<LinkSpec> links;
    double noise_sigma_db = 0.0;
    std::string synth_aim = "paths";  ///< "paths": one record per traced path; "links": use link pointings
    std::uint64_t seed = 1;
    std::optional<double> tof_gate_ns;
    std::optional<double> angle_gate_deg;
    std::filesystem::path out_dir = ".";
};

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source = "<input>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mmray
