#include "mmray/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mmray/errors.hpp"
#include "mmray/log.hpp"

namespace mmray {
namespace {

// Loss assumed for every interaction while tracing and for materials the
// initial library has not calibrated yet.
constexpr double kPlaceholderLossDb = 1.0;

struct ColumnKey {
    std::string material;
    InteractionKind kind;
};

double population_std(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

AntennaPattern DirectionalMeasurement::tx_pattern() const {
    return AntennaPattern::make_directional(tx_gain_dbi, tx_hpbw_deg, tx_hpbw_deg);
}

AntennaPattern DirectionalMeasurement::rx_pattern() const {
    return AntennaPattern::make_directional(rx_gain_dbi, rx_hpbw_deg, rx_hpbw_deg);
}

LinkBudget DirectionalMeasurement::budget() const {
    return {frequency_ghz, ptx_dbm, tx_pattern(), tx_pointing, rx_pattern(), rx_pointing};
}

std::optional<PropagationPath> match_measurement(const DirectionalMeasurement& m,
                                                 std::span<const PropagationPath> paths,
                                                 const MaterialLibrary& lib,
                                                 const MatchGates& gates) {
    const double tx_gate = gates.tx_angle_deg.value_or(m.tx_hpbw_deg / 2.0);
    const double rx_gate = gates.rx_angle_deg.value_or(m.rx_hpbw_deg / 2.0);
    const LinkBudget budget = m.budget();
    const PropagationPath* best = nullptr;
    double best_power = -std::numeric_limits<double>::infinity();
    for (const PropagationPath& p : paths) {
        if (angular_offset_deg(p.aod, m.tx_pointing) > tx_gate) continue;
        if (angular_offset_deg(p.aoa, m.rx_pointing) > rx_gate) continue;
        if (m.measured_tof_ns &&
            std::abs(time_of_flight_ns(p.length_m) - *m.measured_tof_ns) > gates.tof_ns)
            continue;
        const double power = path_power(p, lib, budget).power_dbm;
        if (!best || power > best_power) {
            best = &p;
            best_power = power;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

std::string column_label(const std::string& material, InteractionKind kind) {
    return material + ":" + to_string(kind);
}

Eigen::MatrixXd LinearSystem::design_matrix() const {
    Eigen::MatrixXd W(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].weights[c];
    return W;
}

Eigen::VectorXd LinearSystem::targets() const {
    Eigen::VectorXd A(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) A(static_cast<Eigen::Index>(r)) = rows[r].target_db;
    return A;
}

LinearSystem build_system(std::span<const MeasurementMatch> matches,
                          std::span<const std::string> materials) {
    if (matches.empty()) throw std::invalid_argument("cannot build a system from zero matches");

    std::set<std::string> universe(materials.begin(), materials.end());
    for (const MeasurementMatch& mm : matches)
        for (const Interaction& it : mm.path.interactions) {
            if (it.kind == InteractionKind::scattering)
                throw std::invalid_argument("scattering paths cannot enter the calibration system");
            universe.insert(it.material_id);
        }

    std::vector<ColumnKey> all_columns;
    for (const std::string& m : universe) all_columns.push_back({m, InteractionKind::penetration});
    for (const std::string& m : universe) all_columns.push_back({m, InteractionKind::reflection});

    std::vector<DesignRow> full_rows;
    LinearSystem sys;
    for (const MeasurementMatch& mm : matches) {
        const DirectionalMeasurement& m = mm.measurement;
        DesignRow row;
        row.measurement_id = m.id;
        row.path = mm.path;
        row.weights.assign(all_columns.size(), 0);
        for (const Interaction& it : mm.path.interactions) {
            for (std::size_t c = 0; c < all_columns.size(); ++c)
                if (all_columns[c].material == it.material_id && all_columns[c].kind == it.kind)
                    ++row.weights[c];
        }
        const LinkBudget budget = m.budget();
        row.target_db = m.ptx_dbm +
                        antenna_gain_dbi(budget.tx_pattern, m.tx_pointing, mm.path.aod) +
                        antenna_gain_dbi(budget.rx_pattern, m.rx_pointing, mm.path.aoa) -
                        fspl_db(mm.path.length_m, m.frequency_ghz) - m.measured_power_dbm;
        if (mm.path.interactions.empty())
            sys.validation_rows.push_back(std::move(row));
        else
            full_rows.push_back(std::move(row));
    }

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < all_columns.size(); ++c) {
        const bool used = std::any_of(full_rows.begin(), full_rows.end(),
                                      [c](const DesignRow& r) { return r.weights[c] != 0; });
        const std::string label = column_label(all_columns[c].material, all_columns[c].kind);
        if (used) {
            kept.push_back(c);
            sys.columns.push_back(label);
        } else {
            sys.removed_columns.push_back(label);
        }
    }
    for (DesignRow& r : full_rows) {
        std::vector<int> w;
        w.reserve(kept.size());
        for (std::size_t c : kept) w.push_back(r.weights[c]);
        r.weights = std::move(w);
        sys.rows.push_back(std::move(r));
    }
    for (DesignRow& r : sys.validation_rows) r.weights.assign(kept.size(), 0);
    return sys;
}

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& W, const Eigen::VectorXd& A) {
    if (W.rows() == 0 || W.cols() == 0) throw std::invalid_argument("empty design matrix");
    if (W.rows() != A.size()) throw std::invalid_argument("design matrix / target size mismatch");
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(W);
    LeastSquaresSolution out;
    out.losses = cod.solve(A);
    out.residuals = A - W * out.losses;
    out.rank = static_cast<int>(cod.rank());
    return out;
}

std::vector<double> CalibrationResult::residual_values() const {
    std::vector<double> v;
    v.reserve(residuals.size());
    for (const RowResidual& r : residuals) v.push_back(r.residual_db);
    return v;
}

std::optional<double> CalibrationResult::loss(const std::string& material,
                                              InteractionKind kind) const {
    for (const MaterialEstimate& e : estimates)
        if (e.material == material && e.kind == kind) return e.loss_db;
    return std::nullopt;
}

CalibrationOutcome calibrate(const EnvironmentMap& env, const MaterialLibrary& initial,
                             std::span<const DirectionalMeasurement> measurements,
                             const CalibrationConfig& config) {
    if (measurements.empty()) throw InputError("no measurements to calibrate against");
    const double f = measurements.front().frequency_ghz;
    for (const DirectionalMeasurement& m : measurements)
        if (!same_frequency(m.frequency_ghz, f))
            throw InputError("measurements span several frequency bands; calibrate one band per run");

    const std::vector<std::string> names = env.material_ids();
    std::vector<std::string> missing;
    std::vector<Material> placeholder;
    std::vector<Material> working;
    for (const std::string& name : names) {
        const Material* m = nullptr;
        try {
            m = &initial.lookup(name, f);
        } catch (const MissingMaterial&) {
            missing.push_back(name);
            continue;
        }
        placeholder.push_back({name, f, m->environment, kPlaceholderLossDb, kPlaceholderLossDb});
        Material w = *m;
        if (!w.reflection_loss_db) w.reflection_loss_db = kPlaceholderLossDb;
        if (!w.penetration_loss_db) w.penetration_loss_db = kPlaceholderLossDb;
        w.scattering_coefficient = 0.0;
        working.push_back(std::move(w));
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "material library has no entry at " << f << " GHz for:";
        for (const std::string& n : missing) os << ' ' << n;
        throw MissingMaterial(missing.front(), f, os.str());
    }
    const MaterialLibrary placeholder_lib(std::move(placeholder));
    const MaterialLibrary working_lib(std::move(working));

    TracerConfig tracer = config.tracer;
    tracer.frequency_ghz = f;
    tracer.strict_materials = false;

    MatchGates gates;
    gates.tof_ns = config.tof_gate_ns.value_or(1.0 / config.bandwidth_ghz);
    gates.tx_angle_deg = config.angle_gate_deg;
    gates.rx_angle_deg = config.angle_gate_deg;

    struct Site {
        Vec3 tx, rx;
        std::vector<PropagationPath> paths;
    };
    std::vector<Site> sites;
    std::vector<MeasurementMatch> matches;
    CalibrationResult result;
    for (const DirectionalMeasurement& m : measurements) {
        auto site = std::find_if(sites.begin(), sites.end(),
                                 [&](const Site& s) { return s.tx == m.tx && s.rx == m.rx; });
        if (site == sites.end()) {
            sites.push_back({m.tx, m.rx, trace_paths(env, placeholder_lib, m.tx, m.rx, tracer)});
            site = std::prev(sites.end());
        }
        if (auto p = match_measurement(m, site->paths, working_lib, gates))
            matches.push_back({m, std::move(*p)});
        else
            result.unmatched_measurements.push_back(m.id);
    }
    if (!result.unmatched_measurements.empty())
        log_warning(std::to_string(result.unmatched_measurements.size()) +
                    " measurement(s) matched no traced path within the ToF/angle gates");
    if (matches.empty()) {
        std::ostringstream os;
        os << "no measurement matched a traced path (" << measurements.size()
           << " record(s) failed the ToF gate of " << gates.tof_ns << " ns or the angle gates)";
        throw NumericalError(os.str());
    }

    const LinearSystem sys = build_system(matches, names);
    Eigen::VectorXd losses;
    if (!sys.rows.empty()) {
        const Eigen::MatrixXd W = sys.design_matrix();
        const LeastSquaresSolution sol = solve_least_squares(W, sys.targets());
        if (sol.rank == 0) throw NumericalError("calibration system has rank zero");
        result.rank = sol.rank;
        losses = sol.losses;
        for (std::size_t r = 0; r < sys.rows.size(); ++r)
            result.residuals.push_back(
                {sys.rows[r].measurement_id, sol.residuals(static_cast<Eigen::Index>(r)), false});

        const auto m = static_cast<double>(W.rows());
        const double dof = m - sol.rank;
        Eigen::VectorXd se = Eigen::VectorXd::Constant(W.cols(), std::numeric_limits<double>::quiet_NaN());
        if (dof > 0) {
            const double sigma2 = sol.residuals.squaredNorm() / dof;
            const Eigen::MatrixXd normal = W.transpose() * W;
            const Eigen::MatrixXd cov =
                sigma2 * Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(normal).pseudoInverse();
            for (Eigen::Index c = 0; c < W.cols(); ++c) se(c) = std::sqrt(std::max(0.0, cov(c, c)));
        }
        for (std::size_t c = 0; c < sys.columns.size(); ++c) {
            const std::string& label = sys.columns[c];
            const auto colon = label.rfind(':');
            MaterialEstimate e;
            e.column = label;
            e.material = label.substr(0, colon);
            e.kind = label.substr(colon + 1) == "penetration" ? InteractionKind::penetration
                                                              : InteractionKind::reflection;
            e.loss_db = losses(static_cast<Eigen::Index>(c));
            e.standard_error_db = se(static_cast<Eigen::Index>(c));
            if (e.loss_db < 0.0)
                log_warning("negative loss estimate for " + label +
                            " indicates a model/data mismatch");
            result.estimates.push_back(std::move(e));
        }
        if (sol.rank < static_cast<int>(W.cols()))
            log_warning("calibration system is rank deficient (rank " + std::to_string(sol.rank) +
                        " of " + std::to_string(W.cols()) + "); minimum-norm estimates reported");
    }
    for (const DesignRow& r : sys.validation_rows)
        result.residuals.push_back({r.measurement_id, r.target_db, true});

    const std::vector<double> values = result.residual_values();
    const ResidualStatistics stats = residual_statistics(values);
    result.mean_error_db = stats.mean_db;
    result.std_error_db = stats.std_db;

    result.unresolved_columns = sys.removed_columns;
    for (const std::string& name : names) {
        const bool any = std::any_of(result.estimates.begin(), result.estimates.end(),
                                     [&](const MaterialEstimate& e) { return e.material == name; });
        if (!any) result.unresolved_materials.push_back(name);
    }

    MaterialLibrary library = initial;
    for (const std::string& name : names) {
        Material m = initial.lookup(name, f);
        bool touched = false;
        if (auto v = result.loss(name, InteractionKind::reflection)) {
            m.reflection_loss_db = std::max(0.0, *v);
            touched = true;
        }
        if (auto v = result.loss(name, InteractionKind::penetration)) {
            m.penetration_loss_db = std::max(0.0, *v);
            touched = true;
        }
        if (touched) {
            if (m.environment.empty()) m.environment = config.environment;
            library.upsert(std::move(m));
        }
    }
    return {std::move(result), std::move(library)};
}

ResidualStatistics residual_statistics(std::span<const double> residuals) {
    if (residuals.empty()) throw std::invalid_argument("no residuals");
    ResidualStatistics s;
    s.mean_db = std::accumulate(residuals.begin(), residuals.end(), 0.0) /
                static_cast<double>(residuals.size());
    s.std_db = population_std(residuals, s.mean_db);
    for (double r : residuals) {
        const auto bin = static_cast<std::size_t>(std::floor(std::abs(r)));
        if (s.histogram.size() <= bin) s.histogram.resize(bin + 1, 0);
        ++s.histogram[bin];
    }
    return s;
}

ResidualStatistics residual_statistics(const CalibrationResult& result) {
    const std::vector<double> v = result.residual_values();
    return residual_statistics(v);
}

}  // namespace mmray
