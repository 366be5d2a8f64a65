// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cli_fixture.hpp"
#include "mmray/calibration.hpp"
#include "mmray/channel.hpp"
#include "mmray/log.hpp"
#include "mmray/stats.hpp"
#include "mmray/synth.hpp"
#include "mmray/tracer.hpp"
#include "oracles.hpp"
#include "table_rows.hpp"

using namespace mmray;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects the first failure; `detail` carries the summary printed on the PASS/FAIL line.
struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

MaterialLibrary lib28() { return oracle::office_library(); }

// 1. SBR tracer equals the exhaustive image method on random scenes.
Verdict tracer_oracle() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    const MaterialLibrary lib = lib28();
    std::size_t total = 0;
    for (int scene = 0; scene < 25; ++scene) {
        const oracle::Scene s = oracle::random_scene(rng, scene % 2 == 1);
        v.require(s.env.size() <= 20, "scene " + std::to_string(scene) + " has more than 20 facets");
        TracerConfig c;
        c.max_reflections = 2;
        c.angular_spacing_deg = 0.5;
        const auto traced = trace_paths(s.env, lib, s.tx, s.rx, c);
        const auto exhaustive = image_method_exhaustive(s.env, lib, s.tx, s.rx, 2, c);
        const std::string diff = oracle::compare_path_sets(traced, exhaustive, 1e-6);
        v.require(diff.empty(), "scene " + std::to_string(scene) + ": " + diff);
        total += traced.size();
    }
    const double secs = seconds_since(t0);
    v.require(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
    if (v.ok) v.detail = "25 scenes, " + std::to_string(total) + " paths, " + fmt(secs) + " s";
    return v;
}

double truth_loss(const MaterialLibrary& truth, const MaterialEstimate& e) {
    const Material& m = truth.lookup(e.material, 28.0);
    return *(e.kind == InteractionKind::reflection ? m.reflection_loss_db : m.penetration_loss_db);
}

// 2. Noiseless synthesize-then-calibrate recovers the ground truth.
Verdict closed_loop_noiseless() {
    Verdict v;
    const auto t0 = Clock::now();
    const oracle::CalibrationFixture fx = oracle::calibration_fixture(14, 2);
    const auto meas = synthesize_measurements(fx.env, fx.truth, fx.links, fx.synth, 1);
    v.require(meas.size() >= 50, "only " + std::to_string(meas.size()) + " records");
    const CalibrationOutcome out = calibrate(fx.env, fx.initial, meas, fx.calibration);
    const CalibrationResult& r = out.result;
    std::vector<std::string> materials;
    double worst = 0.0;
    for (const MaterialEstimate& e : r.estimates) {
        worst = std::max(worst, std::abs(e.loss_db - truth_loss(fx.truth, e)));
        if (std::find(materials.begin(), materials.end(), e.material) == materials.end())
            materials.push_back(e.material);
    }
    v.require(materials.size() == 3, std::to_string(materials.size()) + " of 3 materials estimated");
    v.require(r.estimates.size() == 6, std::to_string(r.estimates.size()) + " of 6 loss columns estimated");
    v.require(worst <= 1e-6, "max loss error " + fmt(worst) + " dB");
    v.require(r.std_error_db < 1e-6, "residual std " + fmt(r.std_error_db) + " dB");
    v.require(r.unmatched_measurements.empty(), "unmatched records");
    const double secs = seconds_since(t0);
    v.require(secs < 30.0, "runtime " + fmt(secs) + " s exceeds 30 s");
    if (v.ok)
        v.detail = std::to_string(meas.size()) + " records, max error " + fmt(worst) + " dB, residual std " +
                   fmt(r.std_error_db) + " dB, " + fmt(secs) + " s";
    return v;
}

// 3. Least-squares solver optimality and agreement with a grid search.
Verdict solver_correctness() {
    Verdict v;
    std::mt19937_64 rng(4242);
    int systems = 0, grid_cases = 0;
    double worst_opt = 0.0, worst_grid = 0.0;
    while (systems < 1000) {
        const int n = systems % 5 == 0 ? 2 : std::uniform_int_distribution<int>(1, 10)(rng);
        const int m = std::uniform_int_distribution<int>(n, 50)(rng);
        Eigen::MatrixXd W(m, n);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < n; ++c) W(r, c) = std::uniform_int_distribution<int>(0, 3)(rng);
        if (Eigen::FullPivLU<Eigen::MatrixXd>(W).rank() < n) continue;
        Eigen::VectorXd L(n);
        for (int c = 0; c < n; ++c) L(c) = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
        Eigen::VectorXd A = W * L;
        std::normal_distribution<double> noise(0.0, 2.0);
        for (int r = 0; r < m; ++r) A(r) += noise(rng);
        ++systems;

        const LeastSquaresSolution s = solve_least_squares(W, A);
        v.require(s.rank == n, "full-rank system reported rank " + std::to_string(s.rank));
        const double opt = (W.transpose() * (A - W * s.losses)).cwiseAbs().maxCoeff();
        worst_opt = std::max(worst_opt, opt);
        if (n == 2) {
            const Eigen::Vector2d g = oracle::grid_minimize(W, A, -15.0, 35.0, 0.01);
            worst_grid = std::max(worst_grid, (g - s.losses).cwiseAbs().maxCoeff());
            ++grid_cases;
        }
    }
    v.require(worst_opt <= 1e-8, "max |W^T r| " + fmt(worst_opt));
    v.require(worst_grid <= 0.02, "grid disagreement " + fmt(worst_grid) + " dB");
    if (v.ok)
        v.detail = "1000 systems, max |W^T r| " + fmt(worst_opt) + ", " + std::to_string(grid_cases) +
                   " grid cases within " + fmt(worst_grid) + " dB";
    return v;
}

// 4. Residual spread under injected noise.
Verdict noise_behaviour() {
    Verdict v;
    const oracle::CalibrationFixture fx = oracle::calibration_fixture(16, 3);
    std::ostringstream detail;
    const struct {
        double sigma, lo, hi;
        std::uint64_t seed;
    } cases[] = {{2.5, 2.0, 3.0, 101}, {1.8, 1.4, 2.2, 202}};
    for (const auto& c : cases) {
        oracle::CalibrationFixture run = fx;
        run.synth.noise_sigma_db = c.sigma;
        const auto meas = synthesize_measurements(run.env, run.truth, run.links, run.synth, c.seed);
        v.require(meas.size() >= 200, "only " + std::to_string(meas.size()) + " records");
        const CalibrationOutcome out = calibrate(run.env, run.initial, meas, run.calibration);
        const double std_db = out.result.std_error_db;
        v.require(std_db >= c.lo && std_db <= c.hi,
                  "sigma " + fmt(c.sigma) + " gave residual std " + fmt(std_db) + " dB");
        detail << "sigma " << fmt(c.sigma) << ": " << meas.size() << " records, std " << fmt(std_db) << " dB; ";
    }
    if (v.ok) v.detail = detail.str().substr(0, detail.str().size() - 2);
    return v;
}

// 5. Bundled library reproduces the printed loss table.
Verdict table_fidelity() {
    Verdict v;
    const MaterialLibrary lib = reference_library();
    const auto& rows = printed_table_rows();
    v.require(lib.size() == rows.size(), "library has " + std::to_string(lib.size()) + " rows, table " +
                                             std::to_string(rows.size()));
    for (const auto& row : rows) {
        const std::string where = row[0] + " " + row[1] + " GHz " + row[2];
        const Material* m = nullptr;
        try {
            m = &lib.lookup(library_name(row[0]), std::stod(row[1]), row[2]);
        } catch (const std::exception&) {
            v.require(false, "missing " + where);
            continue;
        }
        auto same = [](const std::optional<double>& have, const std::string& printed) {
            return printed == "-" ? !have.has_value() : have.has_value() && *have == std::stod(printed);
        };
        v.require(same(m->reflection_loss_db, row[3]), "reflection loss differs for " + where);
        v.require(same(m->penetration_loss_db, row[4]), "penetration loss differs for " + where);
    }
    const Material& dw = lib.lookup("drywall", 28.0);
    v.require(dw.reflection_loss_db == 6.1 && dw.penetration_loss_db == 4.0, "drywall 28 GHz");
    const Material& gl = lib.lookup("glass", 140.0, "Indoor Office");
    v.require(gl.reflection_loss_db == 24.5 && gl.penetration_loss_db == 7.2, "glass 140 GHz office");
    v.require(lib.lookup("brick_wall", 140.0).reflection_loss_db == 18.9, "brick wall 140 GHz");
    if (v.ok) v.detail = std::to_string(rows.size()) + " rows identical";
    return v;
}

MultipathComponent tap(double mw, double tof, double az) {
    MultipathComponent m;
    m.power_dbm = mw_to_dbm(mw);
    m.tof_ns = tof;
    m.aoa = {az, 0.0};
    m.aod = {-az, 0.0};
    return m;
}

// 6. Delay and angular spread invariants and hand-derived values.
Verdict stats_invariants() {
    Verdict v;
    std::mt19937_64 rng(66);
    double worst_shift = 0.0, worst_scale = 0.0, worst_rot = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<MultipathComponent> taps;
        const int n = 2 + trial % 25;
        for (int k = 0; k < n; ++k)
            taps.push_back(tap(std::pow(10.0, std::uniform_real_distribution<double>(-11, -6)(rng)),
                               std::uniform_real_distribution<double>(5, 500)(rng),
                               std::uniform_real_distribution<double>(-70, 70)(rng)));
        const double ds = rms_delay_spread_ns(taps);
        const double as_a = angular_spread_deg(taps, AngleSide::aoa);
        const double as_d = angular_spread_deg(taps, AngleSide::aod);
        const double shift = std::uniform_real_distribution<double>(-5, 1000)(rng);
        const double k = std::uniform_real_distribution<double>(0.1, 10)(rng);
        const double rot = std::uniform_real_distribution<double>(-360, 360)(rng);
        auto shifted = taps, scaled = taps, rotated = taps;
        for (int i = 0; i < n; ++i) {
            shifted[i].tof_ns += shift;
            scaled[i].tof_ns *= k;
            rotated[i].aoa.azimuth_deg += rot;
            rotated[i].aod.azimuth_deg += rot;
        }
        worst_shift = std::max(worst_shift, std::abs(rms_delay_spread_ns(shifted) - ds));
        worst_scale = std::max(worst_scale, std::abs(rms_delay_spread_ns(scaled) - k * ds));
        worst_rot = std::max({worst_rot, std::abs(angular_spread_deg(rotated, AngleSide::aoa) - as_a),
                              std::abs(angular_spread_deg(rotated, AngleSide::aod) - as_d)});
    }
    v.require(worst_shift <= 1e-9, "shift changed delay spread by " + fmt(worst_shift) + " ns");
    v.require(worst_scale <= 1e-9, "scaling error " + fmt(worst_scale) + " ns");
    v.require(worst_rot <= 1e-12, "rotation changed angular spread by " + fmt(worst_rot) + " deg");

    const std::vector<MultipathComponent> one{tap(1e-7, 40.0, 25.0)};
    v.require(rms_delay_spread_ns(one) == 0.0 && angular_spread_deg(one, AngleSide::aoa) == 0.0 &&
                  angular_spread_deg(one, AngleSide::aod) == 0.0,
              "single MPC spreads not zero");
    const std::vector<MultipathComponent> pair{tap(1e-6, 0.0, 0.0), tap(1e-6, 100.0, 90.0)};
    const double ds = rms_delay_spread_ns(pair);
    const double as = angular_spread_deg(pair, AngleSide::aoa);
    v.require(std::abs(ds - 50.0) <= 1e-9, "two taps 100 ns apart gave " + fmt(ds) + " ns");
    v.require(std::abs(as - 47.70) <= 0.01, "two MPCs 90 deg apart gave " + fmt(as) + " deg");
    if (v.ok)
        v.detail = "shift " + fmt(worst_shift) + " ns, scale " + fmt(worst_scale) + " ns, rotation " +
                   fmt(worst_rot) + " deg; 50 ns, " + fmt(as) + " deg";
    return v;
}

struct Fixture {
    std::string name;
    EnvironmentMap env;
    Vec3 tx, rx;
};

std::vector<Fixture> fixtures() {
    std::vector<Fixture> out;
    std::mt19937_64 rng(707);
    for (int k = 0; k < 4; ++k) {
        oracle::Scene s = oracle::random_scene(rng, k % 2 == 1);
        out.push_back({"random scene " + std::to_string(k), std::move(s.env), s.tx, s.rx});
    }
    const oracle::CalibrationFixture fx = oracle::calibration_fixture(1, 9);
    out.push_back({"calibration office", fx.env, fx.links[0].tx, fx.links[0].rx});
    out.push_back({"bundled box room", load_environment(MMRAY_DATA_DIR "/box_room.json"), {1, 1, 1.5}, {4.5, 2.5, 1.2}});
    out.push_back({"parallel walls", EnvironmentMap("walls", {oracle::rect_x("w0", "drywall", 0.0, -50, 50, -50, 50),
                                                              oracle::rect_x("w1", "glass", 4.0, -50, 50, -50, 50)}),
                   {1.1, 0.0, 0.0}, {2.7, 0.9, 0.3}});
    return out;
}

// 7. Reflection-order cap and tx/rx reciprocity.
Verdict cap_and_reciprocity() {
    Verdict v;
    const MaterialLibrary lib = lib28();
    int deepest = 0;
    std::size_t compared = 0;
    const auto fx = fixtures();
    for (const Fixture& f : fx) {
        for (int order : {2, 5, 6, 99}) {
            if (order > 2 && f.env.size() > 8) continue;
            TracerConfig c;
            c.max_reflections = order;
            const auto fwd = trace_paths(f.env, lib, f.tx, f.rx, c);
            for (const auto& p : fwd) deepest = std::max(deepest, p.count(InteractionKind::reflection));
            v.require(std::all_of(fwd.begin(), fwd.end(),
                                  [&](const PropagationPath& p) {
                                      return p.count(InteractionKind::reflection) <= std::min(order, 5);
                                  }),
                      f.name + ": path above the reflection cap");
            if (order == 6) continue;  // identical to 5 and 99
            const auto rev = trace_paths(f.env, lib, f.rx, f.tx, c);
            v.require(rev.size() == fwd.size(), f.name + " order " + std::to_string(order) + ": " +
                                                    std::to_string(fwd.size()) + " forward vs " +
                                                    std::to_string(rev.size()) + " reversed paths");
            for (const auto& p : fwd) {
                const auto sig = oracle::reversed_signature(p);
                const bool found = std::any_of(rev.begin(), rev.end(), [&](const PropagationPath& q) {
                    return oracle::signature(q) == sig && std::abs(q.length_m - p.length_m) <= 1e-9;
                });
                v.require(found, f.name + ": no mirrored path for a " +
                                     std::to_string(p.interactions.size()) + "-interaction path");
                ++compared;
            }
        }
    }
    v.require(deepest == 5, "deepest path has " + std::to_string(deepest) + " reflections, cap not exercised");
    if (v.ok)
        v.detail = std::to_string(fx.size()) + " fixtures, " + std::to_string(compared) +
                   " mirrored paths, deepest " + std::to_string(deepest) + " reflections";
    return v;
}

// 8. Free-space path loss.
Verdict fspl_checks() {
    Verdict v;
    const double base = fspl_db(1.0, 1.0);
    v.require(std::abs(base - 32.45) <= 0.01, "fspl(1 m, 1 GHz) = " + fmt(base));
    double worst = 0.0;
    for (double d : {0.5, 1.0, 3.7, 10.0, 250.0})
        for (double f : {1.0, 28.0, 73.0, 140.0})
            worst = std::max(worst, std::abs(fspl_db(2.0 * d, f) - fspl_db(d, f) - 6.02));
    v.require(worst <= 0.001, "doubling delta off by " + fmt(worst) + " dB");
    if (v.ok) v.detail = "fspl(1,1) = " + fmt(base) + " dB, doubling delta within " + fmt(worst) + " dB of 6.02";
    return v;
}

// 9. Every CLI command reproduces its outputs byte for byte.
Verdict cli_determinism() {
    Verdict v;
    oracle::TempDir dir("acceptance");
    const auto cfg = oracle::write_closed_loop(dir, 3, 12, 2.5);
    auto check = [&](const oracle::CliRun& r, const std::string& what) {
        v.require(r.code == kExitSuccess, what + " exited " + std::to_string(r.code) + ": " + r.err);
    };
    check(oracle::run({"synth", "--config", cfg.string()}), "synth");
    std::vector<std::string> stdouts[2];
    for (int pass = 0; pass < 2; ++pass) {
        const std::string out = (dir / ("run" + std::to_string(pass))).string();
        const std::string lean = (dir / ("lean" + std::to_string(pass))).string();
        const std::vector<std::vector<std::string>> commands = {
            {"synth", "--config", cfg.string(), "--out", out},
            {"trace", "--config", cfg.string(), "--out", out},
            {"predict", "--config", cfg.string(), "--out", out},
            {"calibrate", "--config", cfg.string(), "--out", out},
            {"predict", "--config", cfg.string(), "--out", lean, "--max-reflections", "1"},
            {"compare", "--measured", out + "/stats.csv", "--simulated", lean + "/stats.csv", "--out", out},
        };
        for (const auto& args : commands) {
            const oracle::CliRun r = oracle::run(args);
            check(r, args[0]);
            stdouts[pass].push_back(r.out);
        }
    }
    v.require(stdouts[0] == stdouts[1], "console output differs between runs");
    std::size_t files = 0;
    for (const char* sub : {"run", "lean"}) {
        for (const auto& entry : std::filesystem::directory_iterator(dir / (std::string(sub) + "0"))) {
            const auto twin = dir / (std::string(sub) + "1") / entry.path().filename();
            v.require(std::filesystem::exists(twin), "missing " + twin.string());
            if (std::filesystem::exists(twin))
                v.require(oracle::slurp(entry.path()) == oracle::slurp(twin),
                          entry.path().filename().string() + " differs between runs");
            ++files;
        }
    }
    v.require(files >= 10, "only " + std::to_string(files) + " output files");
    if (v.ok) v.detail = "synth, trace, predict, calibrate, compare: " + std::to_string(files) + " files identical";
    return v;
}

}  // namespace

int main() {
    set_log_level(LogLevel::error);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"tracer matches exhaustive image method", tracer_oracle},
        {"noiseless closed loop", closed_loop_noiseless},
        {"least-squares solver", solver_correctness},
        {"noise behaviour", noise_behaviour},
        {"reference table fidelity", table_fidelity},
        {"statistics invariants", stats_invariants},
        {"reflection cap and reciprocity", cap_and_reciprocity},
        {"free-space path loss", fspl_checks},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failures += v.ok ? 0 : 1;
        std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
                  << v.detail << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
