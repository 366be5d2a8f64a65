#include "mmray/commands.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mmray/errors.hpp"
#include "mmray/io.hpp"
#include "mmray/log.hpp"
#include "mmray/synth.hpp"

namespace mmray {
namespace {

namespace fs = std::filesystem;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool strict = false;
    bool verbose = false;
    std::optional<int> max_reflections;
    std::optional<double> angular_spacing_deg;
    std::optional<int> max_penetrations;
    std::optional<double> scatter_grid_m;
    std::optional<double> noise_sigma_db;
    std::optional<std::string> true_materials;
    std::string measured;
    std::string simulated;
};

/// Loaded inputs shared by the tracing commands.
struct Session {
    RunConfig config;
    EnvironmentMap env;
    MaterialLibrary lib;
};

RunConfig resolve_config(const Overrides& o) {
    if (o.config.empty()) throw InputError("--config is required for this command");
    RunConfig c = load_run_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.strict) c.tracer.strict_materials = true;
    if (o.max_reflections) c.tracer.max_reflections = *o.max_reflections;
    if (o.angular_spacing_deg) c.tracer.angular_spacing_deg = *o.angular_spacing_deg;
    if (o.max_penetrations) c.tracer.max_penetrations = *o.max_penetrations;
    if (o.scatter_grid_m) c.tracer.scatter_grid_m = *o.scatter_grid_m;
    if (o.noise_sigma_db) c.noise_sigma_db = *o.noise_sigma_db;
    if (o.true_materials) c.true_materials = *o.true_materials;
    if (c.environment.empty()) throw InputError(o.config + ": 'environment' is required");
    return c;
}

MaterialLibrary load_library(const fs::path& path, const RunConfig& c) {
    MaterialLibrary lib = load_material_library(path);
    if (!c.material_environment.empty()) lib = lib.select_environment(c.material_environment);
    return lib.at_frequency(c.frequency_ghz);
}

Session open_session(const Overrides& o) {
    Session s{resolve_config(o), {}, {}};
    s.env = load_environment(s.config.environment);
    fs::path lib_path = s.config.materials;
    if (lib_path.empty()) {
        if (s.env.materials_ref().empty())
            throw InputError("no material library: set 'materials' in the config or "
                             "'materials_ref' in the environment");
        lib_path = s.config.environment.parent_path() / s.env.materials_ref();
    }
    s.lib = load_library(lib_path, s.config);
    if (s.config.links.empty()) throw InputError(o.config + ": no 'links' configured");
    return s;
}

Angles los_bearing(const Vec3& from, const Vec3& to) {
    return direction_angles(normalized(to - from));
}

std::vector<PropagationPath> all_paths(const Session& s, const LinkSpec& link) {
    std::vector<PropagationPath> paths =
        trace_paths(s.env, s.lib, link.tx, link.rx, s.config.tracer);
    if (s.config.include_scattering) {
        std::vector<PropagationPath> diffuse =
            scatter_paths(s.env, s.lib, link.tx, link.rx, s.config.tracer);
        paths.insert(paths.end(), std::make_move_iterator(diffuse.begin()),
                     std::make_move_iterator(diffuse.end()));
        std::stable_sort(paths.begin(), paths.end(),
                         [](const PropagationPath& a, const PropagationPath& b) {
                             return a.length_m < b.length_m;
                         });
    }
    return paths;
}

LinkBudget link_budget(const RunConfig& c, const LinkSpec& link, bool isotropic) {
    LinkBudget b;
    b.frequency_ghz = c.frequency_ghz;
    b.ptx_dbm = c.ptx_dbm;
    b.tx_pattern = isotropic ? AntennaPattern::make_isotropic() : c.tx_antenna;
    b.rx_pattern = isotropic ? AntennaPattern::make_isotropic() : c.rx_antenna;
    b.tx_pointing = link.tx_pointing.value_or(los_bearing(link.tx, link.rx));
    b.rx_pointing = link.rx_pointing.value_or(los_bearing(link.rx, link.tx));
    return b;
}

template <typename Fn>
void write_csv(const fs::path& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text_file(path, os.str());
}

int cmd_trace(const Overrides& o, std::ostream& out, bool with_stats) {
    const Session s = open_session(o);
    const fs::path dir = s.config.out_dir;
    std::vector<ChannelStats> stats;
    for (const LinkSpec& link : s.config.links) {
        const std::vector<PropagationPath> paths = all_paths(s, link);
        const std::vector<MultipathComponent> mpcs =
            path_powers(paths, s.lib, link_budget(s.config, link, false));
        write_csv(dir / (link.id + "_mpc.csv"), [&](std::ostream& os) { write_mpc_csv(os, mpcs); });
        PowerDelayProfile pdp;
        pdp.bin_width_ns = 1.0 / s.config.bandwidth_ghz;
        pdp.threshold_db = s.config.pdp_threshold_db;
        if (!mpcs.empty())
            pdp = synthesize_pdp(mpcs, s.config.bandwidth_ghz, s.config.pdp_threshold_db);
        write_csv(dir / (link.id + "_pdp.csv"), [&](std::ostream& os) { write_pdp_csv(os, pdp); });
        out << link.id << ": " << mpcs.size() << " MPC(s), " << pdp.bins.size() << " PDP bin(s)\n";
        if (with_stats) {
            if (mpcs.empty()) {
                log_warning("link '" + link.id + "' has no MPCs; left out of the statistics");
                continue;
            }
            const std::vector<MultipathComponent> omni =
                path_powers(paths, s.lib, link_budget(s.config, link, true));
            stats.push_back(channel_stats(link.id, omni));
        }
    }
    if (with_stats) {
        write_csv(dir / "stats.csv", [&](std::ostream& os) { write_stats_csv(os, stats); });
        out << "wrote statistics for " << stats.size() << " link(s)\n";
    }
    return kExitSuccess;
}

int cmd_synth(const Overrides& o, std::ostream& out) {
    const RunConfig c = resolve_config(o);
    if (c.true_materials.empty())
        throw InputError("synth needs a ground-truth library ('true_materials' or --true-materials)");
    if (c.tx_antenna.isotropic || c.rx_antenna.isotropic)
        throw InputError("synth needs directional tx_antenna and rx_antenna");
    if (c.links.empty()) throw InputError(o.config + ": no 'links' configured");
    if (c.noise_sigma_db < 0.0) throw InputError("noise_sigma_db must be >= 0");
    const EnvironmentMap env = load_environment(c.environment);
    const MaterialLibrary truth = load_library(c.true_materials, c);

    SynthConfig sc;
    sc.tracer = c.tracer;
    sc.ptx_dbm = c.ptx_dbm;
    sc.tx_antenna = c.tx_antenna;
    sc.rx_antenna = c.rx_antenna;
    sc.noise_sigma_db = c.noise_sigma_db;
    sc.bandwidth_ghz = c.bandwidth_ghz;
    sc.tof_gate_ns = c.tof_gate_ns;
    sc.angle_gate_deg = c.angle_gate_deg;
    sc.aim = c.synth_aim == "links" ? SynthAim::links : SynthAim::paths;
    std::vector<SynthLink> links;
    for (const LinkSpec& l : c.links) links.push_back({l.id, l.tx, l.rx, l.tx_pointing, l.rx_pointing});

    const std::vector<DirectionalMeasurement> rows =
        synthesize_measurements(env, truth, links, sc, c.seed);
    write_csv(c.out_dir / "measurements.csv",
              [&](std::ostream& os) { write_measurements_csv(os, rows); });
    out << "wrote " << rows.size() << " measurement(s) (noise sigma " << c.noise_sigma_db
        << " dB, seed " << c.seed << ")\n";
    return kExitSuccess;
}

int cmd_calibrate(const Overrides& o, std::ostream& out) {
    const RunConfig c = resolve_config(o);
    if (c.measurements.empty()) throw InputError("calibrate needs 'measurements' in the config");
    const EnvironmentMap env = load_environment(c.environment);
    fs::path lib_path = c.materials;
    if (lib_path.empty() && !env.materials_ref().empty())
        lib_path = c.environment.parent_path() / env.materials_ref();
    MaterialLibrary initial;
    if (!lib_path.empty()) {
        initial = load_material_library(lib_path);
        if (!c.material_environment.empty()) initial = initial.select_environment(c.material_environment);
    }
    const std::vector<DirectionalMeasurement> measurements = load_measurements(c.measurements);

    CalibrationConfig cc;
    cc.tracer = c.tracer;
    cc.tof_gate_ns = c.tof_gate_ns;
    cc.angle_gate_deg = c.angle_gate_deg;
    cc.bandwidth_ghz = c.bandwidth_ghz;
    cc.environment = c.material_environment;
    const CalibrationOutcome outcome = calibrate(env, initial, measurements, cc);
    const CalibrationResult& r = outcome.result;
    const double f = measurements.front().frequency_ghz;

    const fs::path dir = c.out_dir;
    write_text_file(dir / "calibration_report.json", calibration_report_json(r, f));
    write_text_file(dir / "recovered_materials.json", material_library_to_json(outcome.library));
    const ResidualStatistics rs = residual_statistics(r);
    write_csv(dir / "residual_histogram.csv",
              [&](std::ostream& os) { write_residual_histogram_csv(os, rs); });
    write_csv(dir / "residuals.csv", [&](std::ostream& os) { write_residuals_csv(os, r); });

    out << "calibrated " << r.estimates.size() << " loss column(s) from " << r.residuals.size()
        << " matched record(s), rank " << r.rank << "\n";
    for (const MaterialEstimate& e : r.estimates)
        out << "  " << e.column << " = " << format_number(e.loss_db) << " dB\n";
    out << "residual mean " << format_number(r.mean_error_db) << " dB, std "
        << format_number(r.std_error_db) << " dB\n";
    if (!r.unmatched_measurements.empty())
        out << r.unmatched_measurements.size() << " record(s) unmatched\n";
    return kExitSuccess;
}

int cmd_compare(const Overrides& o, std::ostream& out) {
    if (o.measured.empty() || o.simulated.empty())
        throw InputError("compare needs --measured and --simulated");
    const std::vector<ChannelStats> measured = load_stats(o.measured);
    const std::vector<ChannelStats> simulated = load_stats(o.simulated);
    const StatsComparison cmp = compare(measured, simulated);
    std::string dir = o.out.value_or(".");
    if (o.out == std::nullopt && !o.config.empty()) dir = resolve_config(o).out_dir.string();
    write_csv(fs::path(dir) / "comparison.csv", [&](std::ostream& os) { write_comparison_csv(os, cmp); });
    write_csv(fs::path(dir) / "comparison_pairs.csv", [&](std::ostream& os) {
        os << "location_id,rms_ds_ns_meas,rms_ds_ns_sim,as_aoa_deg_meas,as_aoa_deg_sim,"
              "as_aod_deg_meas,as_aod_deg_sim\n";
        for (std::size_t i = 0; i < measured.size(); ++i)
            os << measured[i].location_id << ',' << format_number(measured[i].rms_delay_spread_ns)
               << ',' << format_number(simulated[i].rms_delay_spread_ns) << ','
               << format_number(measured[i].angular_spread_aoa_deg) << ','
               << format_number(simulated[i].angular_spread_aoa_deg) << ','
               << format_number(measured[i].angular_spread_aod_deg) << ','
               << format_number(simulated[i].angular_spread_aod_deg) << '\n';
    });
    out << "compared " << measured.size() << " location(s)\n";
    for (const MetricComparison& m : cmp.metrics)
        out << "  " << m.metric << ": mean relative error "
            << format_number(100.0 * m.mean_relative_error) << " %, bias " << format_number(m.bias)
            << "\n";
    return kExitSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Site-specific mmWave ray tracing and material calibration", "mmray"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&o](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "Run configuration (JSON)");
        cmd->add_option("--seed", o.seed, "Noise seed (64-bit)");
        cmd->add_option("--out", o.out, "Output directory");
        cmd->add_flag("--strict-materials", o.strict, "Fail on missing or uncalibrated materials");
        cmd->add_flag("--verbose,-v", o.verbose, "Print informational messages");
        cmd->add_option("--max-reflections", o.max_reflections)->check(CLI::Range(0, 5));
        cmd->add_option("--angular-spacing-deg", o.angular_spacing_deg)->check(CLI::Range(0.05, 10.0));
        cmd->add_option("--max-penetrations", o.max_penetrations)->check(CLI::NonNegativeNumber);
        cmd->add_option("--scatter-grid-m", o.scatter_grid_m)->check(CLI::PositiveNumber);
    };
    CLI::App* trace = app.add_subcommand("trace", "Trace every link; write MPC and PDP CSVs");
    CLI::App* synth = app.add_subcommand("synth", "Generate directional measurements from a ground-truth library");
    CLI::App* calib = app.add_subcommand("calibrate", "Estimate material losses from measurements");
    CLI::App* predict = app.add_subcommand("predict", "Trace and write channel statistics");
    CLI::App* cmp = app.add_subcommand("compare", "Compare measured and simulated statistics");
    for (CLI::App* cmd : {trace, synth, calib, predict, cmp}) add_common(cmd);
    synth->add_option("--noise-sigma-db", o.noise_sigma_db)->check(CLI::NonNegativeNumber);
    synth->add_option("--true-materials", o.true_materials, "Ground-truth material library");
    cmp->add_option("--measured", o.measured, "Measured stats CSV")->required();
    cmp->add_option("--simulated", o.simulated, "Simulated stats CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitInputError;
    }

    set_log_level(o.verbose ? LogLevel::info : LogLevel::warning);
    set_log_sink([&err](LogLevel level, std::string_view msg) {
        const char* tag = level == LogLevel::error     ? "error"
                          : level == LogLevel::warning ? "warning"
                          : level == LogLevel::info    ? "info"
                                                       : "debug";
        err << "mmray: " << tag << ": " << msg << '\n';
    });
    struct SinkReset {
        ~SinkReset() {
            set_log_sink({});
            set_log_level(LogLevel::warning);
        }
    } reset;

    try {
        if (trace->parsed()) return cmd_trace(o, out, false);
        if (predict->parsed()) return cmd_trace(o, out, true);
        if (synth->parsed()) return cmd_synth(o, out);
        if (calib->parsed()) return cmd_calibrate(o, out);
        return cmd_compare(o, out);
    } catch (const MissingMaterial& e) {
        err << "mmray: error: missing material: " << e.what() << '\n';
        return kExitInputError;
    } catch (const NumericalError& e) {
        err << "mmray: error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "mmray: error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        err << "mmray: error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "mmray: error: " << e.what() << '\n';
        return kExitUnexpected;
    }
}

}  // namespace mmray
