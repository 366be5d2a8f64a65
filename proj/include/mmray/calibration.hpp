#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmray/channel.hpp"
#include "mmray/geometry.hpp"
#include "mmray/materials.hpp"
#include "mmray/tracer.hpp"

namespace mmray {

/// One directional record: the strongest MPC seen with both antennas pointed.
struct DirectionalMeasurement {
    std::string id;
    Vec3 tx;
    Vec3 rx;
    double frequency_ghz = 0.0;
    double ptx_dbm = 0.0;
    Angles tx_pointing;
    Angles rx_pointing;
    double tx_gain_dbi = 0.0;
    double tx_hpbw_deg = 10.0;
    double rx_gain_dbi = 0.0;
    double rx_hpbw_deg = 10.0;
    double measured_power_dbm = 0.0;
    std::optional<double> measured_tof_ns;

    AntennaPattern tx_pattern() const;
    AntennaPattern rx_pattern() const;
    LinkBudget budget() const;
};

struct MatchGates {
    double tof_ns = 1.0;
    /// Per-side angle gates; nullopt means half the antenna HPBW.
    std::optional<double> tx_angle_deg;
    std::optional<double> rx_angle_deg;
};

/// Strongest predicted path (priced with `lib`) whose AoD/AoA fall within the
/// angle gates of the pointings and, when a ToF was measured, within the ToF gate.
std::optional<PropagationPath> match_measurement(const DirectionalMeasurement& m,
                                                 std::span<const PropagationPath> paths,
                                                 const MaterialLibrary& lib,
                                                 const MatchGates& gates);

struct MeasurementMatch {
    DirectionalMeasurement measurement;
    PropagationPath path;
};

/// Column label for a material/interaction pair: "name:penetration" or "name:reflection".
std::string column_label(const std::string& material, InteractionKind kind);

struct DesignRow {
    std::vector<int> weights;  ///< ordered like LinearSystem::columns
    double target_db = 0.0;    ///< ptx + G_T + G_R - FSPL - measured power
    std::string measurement_id;
    PropagationPath path;
};

struct LinearSystem {
    std::vector<std::string> columns;          ///< kept columns, penetration block first
    std::vector<std::string> removed_columns;  ///< never touched by any matched path
    std::vector<DesignRow> rows;               ///< paths with at least one interaction
    std::vector<DesignRow> validation_rows;    ///< LOS rows, no unknowns

    Eigen::MatrixXd design_matrix() const;
    Eigen::VectorXd targets() const;
};

/// Builds W and A over the 2N columns [pen_1..pen_N, ref_1..ref_N] for the
/// given material universe, dropping all-zero columns. Throws
/// std::invalid_argument on an empty match list.
LinearSystem build_system(std::span<const MeasurementMatch> matches,
                          std::span<const std::string> materials);

struct LeastSquaresSolution {
    Eigen::VectorXd losses;
    Eigen::VectorXd residuals;  ///< A - W L
    int rank = 0;
};

/// Minimum-norm least-squares solution of W L = A via a rank-revealing
/// complete orthogonal decomposition; equals (W^T W)^-1 W^T A at full rank.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& W, const Eigen::VectorXd& A);

struct MaterialEstimate {
    std::string column;
    std::string material;
    InteractionKind kind = InteractionKind::reflection;
    double loss_db = 0.0;
    double standard_error_db = 0.0;  ///< NaN when the system has no redundancy
};

struct RowResidual {
    std::string measurement_id;
    double residual_db = 0.0;
    bool validation = false;
};

struct CalibrationResult {
    std::vector<MaterialEstimate> estimates;
    std::vector<RowResidual> residuals;
    double mean_error_db = 0.0;
    double std_error_db = 0.0;
    int rank = 0;
    std::vector<std::string> unresolved_materials;  ///< no column resolved at all
    std::vector<std::string> unresolved_columns;
    std::vector<std::string> unmatched_measurements;

    std::vector<double> residual_values() const;
    std::optional<double> loss(const std::string& material, InteractionKind kind) const;
};

struct CalibrationConfig {
    TracerConfig tracer;
    std::optional<double> tof_gate_ns;  ///< default: one delay bin, 1 / bandwidth
    std::optional<double> angle_gate_deg;
    double bandwidth_ghz = 1.0;
    /// Environment tag written on library entries the run creates.
    std::string environment;
};

struct CalibrationOutcome {
    CalibrationResult result;
    MaterialLibrary library;
};

/// Full procedure: trace every distinct (tx, rx) once with placeholder losses,
/// match each record to a path, build and solve the system, and write the
/// recovered losses into a copy of `initial`.
CalibrationOutcome calibrate(const EnvironmentMap& env, const MaterialLibrary& initial,
                             std::span<const DirectionalMeasurement> measurements,
                             const CalibrationConfig& config = {});

struct ResidualStatistics {
    double mean_db = 0.0;
    double std_db = 0.0;  ///< population standard deviation
    std::vector<std::size_t> histogram;  ///< counts of |residual| in [k, k+1) dB
};

ResidualStatistics residual_statistics(std::span<const double> residuals);
ResidualStatistics residual_statistics(const CalibrationResult& result);

}  // namespace mmray
