#include "mmray/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mmray/errors.hpp"

namespace mmray {
namespace {

using nlohmann::json;

// Input iterator over a character buffer that counts consumed newlines, so
// parser callbacks can attribute events to source lines.
class LineCountingIterator {
  public:
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    LineCountingIterator() = default;
    LineCountingIterator(const char* p, int* line) : p_(p), line_(line) {}

    reference operator*() const { return *p_; }
    LineCountingIterator& operator++() {
        if (*p_ == '\n') ++*line_;
        ++p_;
        return *this;
    }
    LineCountingIterator operator++(int) {
        LineCountingIterator copy = *this;
        ++*this;
        return copy;
    }
    bool operator==(const LineCountingIterator& o) const { return p_ == o.p_; }
    bool operator!=(const LineCountingIterator& o) const { return p_ != o.p_; }

  private:
    const char* p_ = nullptr;
    int* line_ = nullptr;
};

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    if (line > 0) throw InputError(source + ":" + std::to_string(line) + ": " + msg);
    throw InputError(source + ": " + msg);
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source + ": " + e.what());
    }
}

double number_field(const json& obj, const char* key, const std::string& source, int line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        fail(source, line, std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& source, int line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        fail(source, line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

Vec3 vec3_from(const json& j, const std::string& what, const std::string& source, int line) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
        fail(source, line, what + " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Angles angles_from(const json& j, const std::string& what, const std::string& source) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(source, 0, what + " must be [azimuth_deg, elevation_deg]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& source, int line, const char* col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        fail(source, line, std::string("column '") + col + "': invalid number '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& source, int line, const char* col) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        fail(source, line, std::string("column '") + col + "': invalid integer '" + s + "'");
    return v;
}

/// Parses a CSV body whose header must equal `header` (whitespace-insensitive).
/// Calls `row(fields, line_number)` for every non-empty data line.
template <typename RowFn>
void parse_csv(const std::string& text, const std::string& source, const char* header, RowFn row) {
    const std::vector<std::string> expected = split_csv(header);
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool seen_header = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (!seen_header) {
            if (fields != expected) fail(source, line_no, std::string("expected header '") + header + "'");
            seen_header = true;
            continue;
        }
        if (fields.size() != expected.size())
            fail(source, line_no, "expected " + std::to_string(expected.size()) + " columns, found " +
                                      std::to_string(fields.size()));
        row(fields, line_no);
    }
    if (!seen_header) fail(source, 0, "empty file, missing header");
}

void check_csv_token(const std::string& s, const char* what) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw InputError(std::string(what) + " '" + s + "' cannot contain commas or newlines");
}

json material_to_json(const Material& m) {
    json j;
    j["name"] = m.name;
    j["frequency_ghz"] = m.frequency_ghz;
    j["environment"] = m.environment;
    if (m.reflection_loss_db) j["reflection_loss_db"] = *m.reflection_loss_db;
    if (m.penetration_loss_db) j["penetration_loss_db"] = *m.penetration_loss_db;
    j["scattering_coefficient"] = m.scattering_coefficient;
    j["scattering_lobe_exponent"] = m.scattering_lobe_exponent;
    return j;
}

AntennaPattern antenna_from(const json& j, const std::string& source) {
    if (j.is_string() && j.get<std::string>() == "isotropic") return AntennaPattern::make_isotropic();
    if (!j.is_object()) fail(source, 0, "antenna must be \"isotropic\" or an object");
    const double gain = number_field(j, "gain_dbi", source, 0);
    if (j.contains("isotropic") && j["isotropic"].get<bool>()) return AntennaPattern::make_isotropic(gain);
    const double az = number_field(j, "hpbw_az_deg", source, 0);
    const double el = j.contains("hpbw_el_deg") ? number_field(j, "hpbw_el_deg", source, 0) : az;
    const double floor = j.contains("floor_db") ? number_field(j, "floor_db", source, 0) : -20.0;
    try {
        return AntennaPattern::make_directional(gain, az, el, floor);
    } catch (const std::invalid_argument& e) {
        fail(source, 0, e.what());
    }
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) return "nan";
    return {buf, ptr};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

EnvironmentMap parse_environment(const std::string& text, const std::string& source) {
    int line = 1;
    std::vector<int> facet_lines;
    std::vector<std::vector<int>> vertex_lines;
    std::string top_key;
    const auto callback = [&](int depth, json::parse_event_t event, json& parsed) {
        if (event == json::parse_event_t::key && depth == 1) top_key = parsed.get<std::string>();
        if (top_key == "facets") {
            if (event == json::parse_event_t::object_start && depth == 2) {
                facet_lines.push_back(line);
                vertex_lines.emplace_back();
            } else if (event == json::parse_event_t::array_start && depth == 4 && !vertex_lines.empty()) {
                vertex_lines.back().push_back(line);
            }
        }
        return true;
    };
    json root;
    try {
        root = json::parse(LineCountingIterator(text.data(), &line),
                           LineCountingIterator(text.data() + text.size(), &line), callback);
    } catch (const json::parse_error& e) {
        throw InputError(source + ": " + e.what());
    }
    if (!root.is_object()) fail(source, 1, "environment must be a JSON object");
    const std::string name = root.value("name", std::string());
    const std::string materials_ref = root.value("materials_ref", std::string());
    const auto facets_it = root.find("facets");
    if (facets_it == root.end() || !facets_it->is_array()) fail(source, 1, "missing 'facets' array");

    std::vector<Facet> facets;
    for (std::size_t i = 0; i < facets_it->size(); ++i) {
        const json& jf = (*facets_it)[i];
        const int fline = i < facet_lines.size() ? facet_lines[i] : 0;
        if (!jf.is_object()) fail(source, fline, "facet entry must be an object");
        std::string id;
        if (jf.contains("id") && jf["id"].is_number_integer())
            id = std::to_string(jf["id"].get<long long>());
        else
            id = string_field(jf, "id", source, fline);
        const std::string material = string_field(jf, "material", source, fline);
        const auto vit = jf.find("vertices");
        if (vit == jf.end() || !vit->is_array())
            fail(source, fline, "facet '" + id + "': missing 'vertices' array");
        std::vector<Vec3> vertices;
        for (std::size_t k = 0; k < vit->size(); ++k) {
            const int vline = i < vertex_lines.size() && k < vertex_lines[i].size()
                                  ? vertex_lines[i][k]
                                  : fline;
            vertices.push_back(vec3_from((*vit)[k],
                                         "facet '" + id + "' vertex " + std::to_string(k), source,
                                         vline));
        }
        try {
            facets.emplace_back(id, material, std::move(vertices));
        } catch (const std::invalid_argument& e) {
            fail(source, fline, e.what());
        }
    }
    try {
        return EnvironmentMap(name, std::move(facets), materials_ref);
    } catch (const std::invalid_argument& e) {
        fail(source, 0, e.what());
    }
}

EnvironmentMap load_environment(const std::filesystem::path& path) {
    return parse_environment(read_text_file(path), path.string());
}

std::string environment_to_json(const EnvironmentMap& env) {
    json root;
    root["name"] = env.name();
    root["materials_ref"] = env.materials_ref();
    json facets = json::array();
    for (const Facet& f : env.facets()) {
        json jf;
        jf["id"] = f.id();
        jf["material"] = f.material();
        json verts = json::array();
        for (const Vec3& v : f.vertices()) verts.push_back({v.x, v.y, v.z});
        jf["vertices"] = std::move(verts);
        facets.push_back(std::move(jf));
    }
    root["facets"] = std::move(facets);
    return root.dump(2) + "\n";
}

void save_environment(const EnvironmentMap& env, const std::filesystem::path& path) {
    write_text_file(path, environment_to_json(env));
}

MaterialLibrary parse_material_library(const std::string& text, const std::string& source) {
    const json root = parse_json(text, source);
    if (!root.is_array()) fail(source, 0, "material library must be a JSON array");
    static const std::vector<std::string> known = {
        "name", "frequency_ghz", "environment", "reflection_loss_db", "penetration_loss_db",
        "scattering_coefficient", "scattering_lobe_exponent"};
    std::vector<Material> entries;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& j = root[i];
        const std::string where = source + " entry " + std::to_string(i);
        if (!j.is_object()) fail(where, 0, "must be an object");
        for (const auto& [key, value] : j.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                fail(where, 0, "unknown field '" + key + "'");
        Material m;
        m.name = string_field(j, "name", where, 0);
        m.frequency_ghz = number_field(j, "frequency_ghz", where, 0);
        m.environment = j.value("environment", std::string());
        if (j.contains("reflection_loss_db") && !j["reflection_loss_db"].is_null())
            m.reflection_loss_db = number_field(j, "reflection_loss_db", where, 0);
        if (j.contains("penetration_loss_db") && !j["penetration_loss_db"].is_null())
            m.penetration_loss_db = number_field(j, "penetration_loss_db", where, 0);
        if (j.contains("scattering_coefficient"))
            m.scattering_coefficient = number_field(j, "scattering_coefficient", where, 0);
        if (j.contains("scattering_lobe_exponent"))
            m.scattering_lobe_exponent = number_field(j, "scattering_lobe_exponent", where, 0);
        entries.push_back(std::move(m));
    }
    try {
        return MaterialLibrary(std::move(entries));
    } catch (const std::invalid_argument& e) {
        fail(source, 0, e.what());
    }
}

MaterialLibrary load_material_library(const std::filesystem::path& path) {
    return parse_material_library(read_text_file(path), path.string());
}

std::string material_library_to_json(const MaterialLibrary& lib) {
    json root = json::array();
    for (const Material& m : lib.entries()) root.push_back(material_to_json(m));
    return root.dump(2) + "\n";
}

void save_material_library(const MaterialLibrary& lib, const std::filesystem::path& path) {
    write_text_file(path, material_library_to_json(lib));
}

std::vector<DirectionalMeasurement> parse_measurements_csv(const std::string& text,
                                                           const std::string& source) {
    std::vector<DirectionalMeasurement> out;
    parse_csv(text, source, kMeasurementHeader, [&](const std::vector<std::string>& f, int line) {
        auto num = [&](std::size_t i, const char* col) { return parse_double(f[i], source, line, col); };
        DirectionalMeasurement m;
        m.id = f[0];
        if (m.id.empty()) fail(source, line, "empty measurement id");
        m.tx = {num(1, "tx_x"), num(2, "tx_y"), num(3, "tx_z")};
        m.rx = {num(4, "rx_x"), num(5, "rx_y"), num(6, "rx_z")};
        m.frequency_ghz = num(7, "f_ghz");
        m.ptx_dbm = num(8, "ptx_dbm");
        m.tx_pointing = {num(9, "tx_az"), num(10, "tx_el")};
        m.rx_pointing = {num(11, "rx_az"), num(12, "rx_el")};
        m.tx_gain_dbi = num(13, "tx_gain_dbi");
        m.tx_hpbw_deg = num(14, "tx_hpbw_deg");
        m.rx_gain_dbi = num(15, "rx_gain_dbi");
        m.rx_hpbw_deg = num(16, "rx_hpbw_deg");
        m.measured_power_dbm = num(17, "meas_power_dbm");
        if (!f[18].empty()) m.measured_tof_ns = num(18, "meas_tof_ns");
        if (!(m.frequency_ghz > 0.0)) fail(source, line, "f_ghz must be positive");
        if (!(m.tx_hpbw_deg > 0.0) || !(m.rx_hpbw_deg > 0.0))
            fail(source, line, "beamwidths must be positive");
        out.push_back(std::move(m));
    });
    return out;
}

std::vector<DirectionalMeasurement> load_measurements(const std::filesystem::path& path) {
    return parse_measurements_csv(read_text_file(path), path.string());
}

void write_measurements_csv(std::ostream& os, std::span<const DirectionalMeasurement> rows) {
    os << kMeasurementHeader << '\n';
    for (const DirectionalMeasurement& m : rows) {
        check_csv_token(m.id, "measurement id");
        const double values[] = {m.tx.x, m.tx.y, m.tx.z, m.rx.x, m.rx.y, m.rx.z, m.frequency_ghz,
                                 m.ptx_dbm, m.tx_pointing.azimuth_deg, m.tx_pointing.elevation_deg,
                                 m.rx_pointing.azimuth_deg, m.rx_pointing.elevation_deg,
                                 m.tx_gain_dbi, m.tx_hpbw_deg, m.rx_gain_dbi, m.rx_hpbw_deg,
                                 m.measured_power_dbm};
        os << m.id;
        for (double v : values) os << ',' << format_number(v);
        os << ',';
        if (m.measured_tof_ns) os << format_number(*m.measured_tof_ns);
        os << '\n';
    }
}

void write_mpc_csv(std::ostream& os, std::span<const MultipathComponent> mpcs) {
    os << kMpcHeader << '\n';
    for (std::size_t i = 0; i < mpcs.size(); ++i) {
        const MultipathComponent& m = mpcs[i];
        os << i << ',' << format_number(m.power_dbm) << ',' << format_number(m.tof_ns) << ','
           << format_number(m.aod.azimuth_deg) << ',' << format_number(m.aod.elevation_deg) << ','
           << format_number(m.aoa.azimuth_deg) << ',' << format_number(m.aoa.elevation_deg) << ','
           << m.path.count(InteractionKind::reflection) << ','
           << m.path.count(InteractionKind::penetration) << ','
           << m.path.count(InteractionKind::scattering) << ',' << m.path.interaction_chain() << '\n';
    }
}

std::vector<MpcRecord> parse_mpc_csv(const std::string& text, const std::string& source) {
    std::vector<MpcRecord> out;
    parse_csv(text, source, kMpcHeader, [&](const std::vector<std::string>& f, int line) {
        MpcRecord r;
        r.path_id = parse_int(f[0], source, line, "path_id");
        r.power_dbm = parse_double(f[1], source, line, "power_dbm");
        r.tof_ns = parse_double(f[2], source, line, "tof_ns");
        r.aod = {parse_double(f[3], source, line, "aod_az"), parse_double(f[4], source, line, "aod_el")};
        r.aoa = {parse_double(f[5], source, line, "aoa_az"), parse_double(f[6], source, line, "aoa_el")};
        r.n_reflections = parse_int(f[7], source, line, "n_reflections");
        r.n_penetrations = parse_int(f[8], source, line, "n_penetrations");
        r.n_scatter = parse_int(f[9], source, line, "n_scatter");
        r.interaction_chain = f[10];
        out.push_back(std::move(r));
    });
    return out;
}

void write_pdp_csv(std::ostream& os, const PowerDelayProfile& pdp) {
    os << kPdpHeader << '\n';
    for (const PdpBin& b : pdp.bins)
        os << format_number(b.delay_ns) << ',' << format_number(mw_to_dbm(b.power_mw)) << '\n';
}

std::vector<std::pair<double, double>> parse_pdp_csv(const std::string& text,
                                                     const std::string& source) {
    std::vector<std::pair<double, double>> out;
    parse_csv(text, source, kPdpHeader, [&](const std::vector<std::string>& f, int line) {
        out.emplace_back(parse_double(f[0], source, line, "delay_ns"),
                         parse_double(f[1], source, line, "power_dbm"));
    });
    return out;
}

void write_stats_csv(std::ostream& os, std::span<const ChannelStats> rows) {
    os << kStatsHeader << ',' << kStatsWrappedColumns << '\n';
    for (const ChannelStats& s : rows) {
        check_csv_token(s.location_id, "location id");
        os << s.location_id << ',' << s.n_mpcs << ',' << format_number(s.total_power_dbm) << ','
           << format_number(s.rms_delay_spread_ns) << ',' << format_number(s.angular_spread_aoa_deg)
           << ',' << format_number(s.angular_spread_aod_deg) << ','
           << format_number(s.angular_spread_aoa_wrapped_deg) << ','
           << format_number(s.angular_spread_aod_wrapped_deg) << '\n';
    }
}

std::vector<ChannelStats> parse_stats_csv(const std::string& text, const std::string& source) {
    std::vector<ChannelStats> out;
    const std::string full = std::string(kStatsHeader) + "," + kStatsWrappedColumns;
    const bool wrapped = text.compare(0, full.size(), full) == 0;
    parse_csv(text, source, wrapped ? full.c_str() : kStatsHeader,
              [&](const std::vector<std::string>& f, int line) {
        ChannelStats s;
        s.location_id = f[0];
        const int n = parse_int(f[1], source, line, "n_mpcs");
        if (n < 0) fail(source, line, "n_mpcs must be >= 0");
        s.n_mpcs = static_cast<std::size_t>(n);
        s.total_power_dbm = parse_double(f[2], source, line, "total_power_dbm");
        s.rms_delay_spread_ns = parse_double(f[3], source, line, "rms_ds_ns");
        s.angular_spread_aoa_deg = parse_double(f[4], source, line, "as_aoa_deg");
        s.angular_spread_aod_deg = parse_double(f[5], source, line, "as_aod_deg");
        if (wrapped) {
            s.angular_spread_aoa_wrapped_deg = parse_double(f[6], source, line, "as_aoa_wrapped_deg");
            s.angular_spread_aod_wrapped_deg = parse_double(f[7], source, line, "as_aod_wrapped_deg");
        }
        out.push_back(std::move(s));
    });
    return out;
}

std::vector<ChannelStats> load_stats(const std::filesystem::path& path) {
    return parse_stats_csv(read_text_file(path), path.string());
}

void write_comparison_csv(std::ostream& os, const StatsComparison& cmp) {
    os << "metric,mean_relative_error,bias,mean_absolute_error,pairs\n";
    for (const MetricComparison& m : cmp.metrics)
        os << m.metric << ',' << format_number(m.mean_relative_error) << ',' << format_number(m.bias)
           << ',' << format_number(m.mean_absolute_error) << ',' << m.pairs << '\n';
}

std::string calibration_report_json(const CalibrationResult& result, double frequency_ghz) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["frequency_ghz"] = frequency_ghz;
    j["rank"] = result.rank;
    j["mean_error_db"] = result.mean_error_db;
    j["std_error_db"] = result.std_error_db;
    json est = json::array();
    for (const MaterialEstimate& e : result.estimates)
        est.push_back({{"column", e.column},
                       {"material", e.material},
                       {"kind", to_string(e.kind)},
                       {"loss_db", e.loss_db},
                       {"standard_error_db", finite_or_null(e.standard_error_db)}});
    j["estimates"] = std::move(est);
    j["unresolved_materials"] = result.unresolved_materials;
    j["unresolved_columns"] = result.unresolved_columns;
    j["unmatched_measurements"] = result.unmatched_measurements;
    std::size_t validation = 0;
    for (const RowResidual& r : result.residuals) validation += r.validation ? 1 : 0;
    j["n_system_rows"] = result.residuals.size() - validation;
    j["n_validation_rows"] = validation;
    return j.dump(2) + "\n";
}

void write_residual_histogram_csv(std::ostream& os, const ResidualStatistics& stats) {
    os << "abs_error_lo_db,abs_error_hi_db,count\n";
    for (std::size_t k = 0; k < stats.histogram.size(); ++k)
        os << k << ',' << k + 1 << ',' << stats.histogram[k] << '\n';
}

void write_residuals_csv(std::ostream& os, const CalibrationResult& result) {
    os << "measurement_id,residual_db,validation\n";
    for (const RowResidual& r : result.residuals)
        os << r.measurement_id << ',' << format_number(r.residual_db) << ','
           << (r.validation ? 1 : 0) << '\n';
}

namespace {

RunConfig run_config_from(const std::string& text, const std::filesystem::path& base_dir,
                          const std::string& source) {
    const json j = parse_json(text, source);
    if (!j.is_object()) fail(source, 0, "run config must be a JSON object");
    auto path_of = [&](const char* key) -> std::filesystem::path {
        if (!j.contains(key)) return {};
        std::filesystem::path p = string_field(j, key, source, 0);
        return p.is_absolute() ? p : base_dir / p;
    };
    RunConfig c;
    c.environment = path_of("environment");
    c.materials = path_of("materials");
    c.measurements = path_of("measurements");
    c.true_materials = path_of("true_materials");
    c.material_environment = j.value("material_environment", std::string());
    if (j.contains("frequency_ghz")) c.frequency_ghz = number_field(j, "frequency_ghz", source, 0);
    if (j.contains("bandwidth_ghz")) c.bandwidth_ghz = number_field(j, "bandwidth_ghz", source, 0);
    if (j.contains("ptx_dbm")) c.ptx_dbm = number_field(j, "ptx_dbm", source, 0);
    if (j.contains("pdp_threshold_db")) c.pdp_threshold_db = number_field(j, "pdp_threshold_db", source, 0);
    if (!(c.bandwidth_ghz > 0.0)) fail(source, 0, "bandwidth_ghz must be positive");
    if (j.contains("tracer")) {
        const json& t = j["tracer"];
        if (t.contains("max_reflections")) c.tracer.max_reflections = t["max_reflections"].get<int>();
        if (t.contains("angular_spacing_deg"))
            c.tracer.angular_spacing_deg = number_field(t, "angular_spacing_deg", source, 0);
        if (t.contains("max_penetrations")) c.tracer.max_penetrations = t["max_penetrations"].get<int>();
        if (t.contains("scatter_grid_m")) c.tracer.scatter_grid_m = number_field(t, "scatter_grid_m", source, 0);
        if (t.contains("strict_materials")) c.tracer.strict_materials = t["strict_materials"].get<bool>();
        if (t.contains("include_scattering")) c.include_scattering = t["include_scattering"].get<bool>();
    }
    c.tracer.frequency_ghz = c.frequency_ghz;
    if (j.contains("tx_antenna")) c.tx_antenna = antenna_from(j["tx_antenna"], source);
    if (j.contains("rx_antenna")) c.rx_antenna = antenna_from(j["rx_antenna"], source);
    if (j.contains("links")) {
        if (!j["links"].is_array()) fail(source, 0, "'links' must be an array");
        for (const json& l : j["links"]) {
            LinkSpec link;
            link.id = string_field(l, "id", source, 0);
            check_csv_token(link.id, "link id");
            link.tx = vec3_from(l.at("tx"), "link '" + link.id + "' tx", source, 0);
            link.rx = vec3_from(l.at("rx"), "link '" + link.id + "' rx", source, 0);
            if (l.contains("tx_pointing")) link.tx_pointing = angles_from(l["tx_pointing"], "tx_pointing", source);
            if (l.contains("rx_pointing")) link.rx_pointing = angles_from(l["rx_pointing"], "rx_pointing", source);
            c.links.push_back(std::move(link));
        }
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        if (s.contains("noise_sigma_db")) c.noise_sigma_db = number_field(s, "noise_sigma_db", source, 0);
        if (s.contains("aim")) c.synth_aim = string_field(s, "aim", source, 0);
        if (c.synth_aim != "paths" && c.synth_aim != "links")
            fail(source, 0, "synth.aim must be \"paths\" or \"links\"");
    }
    if (j.contains("calibration")) {
        const json& s = j["calibration"];
        if (s.contains("tof_gate_ns")) c.tof_gate_ns = number_field(s, "tof_gate_ns", source, 0);
        if (s.contains("angle_gate_deg")) c.angle_gate_deg = number_field(s, "angle_gate_deg", source, 0);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = path_of("out");
    return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source) {
    try {
        return run_config_from(text, base_dir, source);
    } catch (const json::exception& e) {
        throw InputError(source + ": " + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text_file(path), path.parent_path(), path.string());
}

}  // namespace mmray
