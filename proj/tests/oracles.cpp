#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace oracle {

using namespace mmray;

MaterialLibrary office_library() {
    return reference_library().select_environment("Indoor Office").at_frequency(28.0);
}

Facet rect_x(const std::string& id, const std::string& mat, double x, double y0, double y1,
             double z0, double z1) {
    return Facet(id, mat, {{x, y0, z0}, {x, y1, z0}, {x, y1, z1}, {x, y0, z1}});
}

Facet rect_y(const std::string& id, const std::string& mat, double y, double x0, double x1,
             double z0, double z1) {
    return Facet(id, mat, {{x0, y, z0}, {x0, y, z1}, {x1, y, z1}, {x1, y, z0}});
}

Facet rect_z(const std::string& id, const std::string& mat, double z, double x0, double x1,
             double y0, double y1) {
    return Facet(id, mat, {{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}});
}

std::vector<Facet> box_walls(double lx, double ly, double lz, const std::string& walls,
                             const std::string& floor, const std::string& ceiling) {
    return {rect_z("floor", floor, 0.0, 0.0, lx, 0.0, ly),
            rect_z("ceiling", ceiling, lz, 0.0, lx, 0.0, ly),
            rect_y("wall_s", walls, 0.0, 0.0, lx, 0.0, lz),
            rect_y("wall_n", walls, ly, 0.0, lx, 0.0, lz),
            rect_x("wall_w", walls, 0.0, 0.0, ly, 0.0, lz),
            rect_x("wall_e", walls, lx, 0.0, ly, 0.0, lz)};
}

Vec3 random_point_clear_of_planes(std::mt19937_64& rng, const EnvironmentMap& env, const Vec3& lo,
                                  const Vec3& hi, double clearance) {
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), uz(lo.z, hi.z);
    for (;;) {
        const Vec3 p{ux(rng), uy(rng), uz(rng)};
        const bool clear = std::all_of(env.facets().begin(), env.facets().end(), [&](const Facet& f) {
            return std::abs(f.signed_distance(p)) > clearance;
        });
        if (clear) return p;
    }
}

namespace {

const char* const kMaterials[] = {"drywall", "glass", "wooden_cupboard"};

std::string pick_material(std::mt19937_64& rng) {
    return kMaterials[std::uniform_int_distribution<int>(0, 2)(rng)];
}

}  // namespace

Scene random_scene(std::mt19937_64& rng, bool corridor) {
    auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    std::vector<Facet> facets;
    double lx, ly, lz;
    if (!corridor) {
        lx = u(4.0, 12.0);
        ly = u(3.0, 10.0);
        lz = u(2.5, 4.0);
        facets = box_walls(lx, ly, lz, pick_material(rng), pick_material(rng), pick_material(rng));
        for (Facet& f : facets) f = Facet(f.id(), pick_material(rng), f.vertices());
        const int panels = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int k = 0; k < panels; ++k) {
            const std::string id = "panel_" + std::to_string(k);
            const int orient = std::uniform_int_distribution<int>(0, 2)(rng);
            if (orient == 0) {
                const double y0 = u(0.2, ly / 2), y1 = u(ly / 2 + 0.3, ly - 0.2);
                facets.push_back(rect_x(id, pick_material(rng), u(0.8, lx - 0.8), y0, y1, u(0.0, 0.5),
                                        u(1.2, lz - 0.2)));
            } else if (orient == 1) {
                const double x0 = u(0.2, lx / 2), x1 = u(lx / 2 + 0.3, lx - 0.2);
                facets.push_back(rect_y(id, pick_material(rng), u(0.8, ly - 0.8), x0, x1, u(0.0, 0.5),
                                        u(1.2, lz - 0.2)));
            } else {
                const double x0 = u(0.3, lx / 2), y0 = u(0.3, ly / 2);
                facets.push_back(rect_z(id, pick_material(rng), u(0.6, 1.1), x0, x0 + u(0.8, 2.0), y0,
                                        y0 + u(0.6, 1.5)));
            }
        }
    } else {
        lx = u(15.0, 30.0);
        ly = u(2.0, 3.0);
        lz = u(2.5, 3.2);
        const std::string floor = pick_material(rng), ceiling = pick_material(rng);
        facets.push_back(rect_z("floor", floor, 0.0, 0.0, lx, 0.0, ly));
        facets.push_back(rect_z("ceiling", ceiling, lz, 0.0, lx, 0.0, ly));
        facets.push_back(rect_x("end_w", pick_material(rng), 0.0, 0.0, ly, 0.0, lz));
        facets.push_back(rect_x("end_e", pick_material(rng), lx, 0.0, ly, 0.0, lz));
        // Long walls split into coplanar segments of different materials.
        for (int side = 0; side < 2; ++side) {
            const int segments = std::uniform_int_distribution<int>(1, 4)(rng);
            std::vector<double> cuts{0.0, lx};
            for (int s = 1; s < segments; ++s) cuts.push_back(u(1.0, lx - 1.0));
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
                if (cuts[s + 1] - cuts[s] < 0.5) continue;
                const std::string id = (side == 0 ? "side_s" : "side_n") + std::to_string(s);
                facets.push_back(rect_y(id, pick_material(rng), side == 0 ? 0.0 : ly, cuts[s],
                                        cuts[s + 1], 0.0, lz));
            }
        }
        // A doorway header and a pillar face.
        facets.push_back(rect_x("header", pick_material(rng), u(3.0, lx - 3.0), 0.0, ly, lz - 0.4, lz - 0.01));
        facets.push_back(rect_y("pillar", pick_material(rng), u(0.6, ly - 0.6), 4.0, 4.5, 0.0, lz));
    }
    Scene s{EnvironmentMap(corridor ? "corridor" : "box", std::move(facets)), {}, {}};
    const Vec3 lo{0.2, 0.2, 0.3}, hi{lx - 0.2, ly - 0.2, lz - 0.3};
    do {
        s.tx = random_point_clear_of_planes(rng, s.env, lo, hi, 0.05);
        s.rx = random_point_clear_of_planes(rng, s.env, lo, hi, 0.05);
    } while (distance(s.tx, s.rx) < 0.5);
    return s;
}

Signature signature(const PropagationPath& p) {
    Signature s;
    for (const Interaction& it : p.interactions) s.emplace_back(it.kind, it.facet_id);
    return s;
}

Signature reversed_signature(const PropagationPath& p) {
    Signature s = signature(p);
    std::reverse(s.begin(), s.end());
    return s;
}

std::string compare_path_sets(const std::vector<PropagationPath>& a,
                              const std::vector<PropagationPath>& b, double length_tol) {
    std::multimap<Signature, double> ma, mb;
    for (const PropagationPath& p : a) ma.emplace(signature(p), p.length_m);
    for (const PropagationPath& p : b) mb.emplace(signature(p), p.length_m);
    std::ostringstream os;
    auto describe = [](const Signature& s) {
        std::string out = "[";
        for (const auto& [kind, id] : s) out += std::string(to_string(kind)).substr(0, 3) + ":" + id + " ";
        return out + "]";
    };
    for (const auto& [sig, len] : ma) {
        auto range = mb.equal_range(sig);
        bool found = false;
        for (auto it = range.first; it != range.second; ++it)
            if (std::abs(it->second - len) <= length_tol) found = true;
        if (!found) os << "only in first: " << describe(sig) << " len " << len << "\n";
    }
    for (const auto& [sig, len] : mb) {
        auto range = ma.equal_range(sig);
        bool found = false;
        for (auto it = range.first; it != range.second; ++it)
            if (std::abs(it->second - len) <= length_tol) found = true;
        if (!found) os << "only in second: " << describe(sig) << " len " << len << "\n";
    }
    if (a.size() != b.size() && os.str().empty())
        os << "size mismatch " << a.size() << " vs " << b.size() << "\n";
    return os.str();
}

Eigen::VectorXd normal_equations(const Eigen::MatrixXd& W, const Eigen::VectorXd& A) {
    const auto n = W.cols();
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index r = 0; r < W.rows(); ++r) s += W(r, i) * W(r, j);
            m[i][j] = s;
        }
        double s = 0.0;
        for (Eigen::Index r = 0; r < W.rows(); ++r) s += W(r, i) * A(r);
        m[i][n] = s;
    }
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (Eigen::Index c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        double s = m[r][n];
        for (Eigen::Index c = r + 1; c < n; ++c) s -= m[r][c] * x(c);
        x(r) = s / m[r][r];
    }
    return x;
}

Eigen::Vector2d grid_minimize(const Eigen::MatrixXd& W, const Eigen::VectorXd& A, double lo,
                              double hi, double step) {
    // Sum of squares expanded once so each grid point costs O(1).
    double g11 = 0, g12 = 0, g22 = 0, b1 = 0, b2 = 0;
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
        g11 += W(r, 0) * W(r, 0);
        g12 += W(r, 0) * W(r, 1);
        g22 += W(r, 1) * W(r, 1);
        b1 += W(r, 0) * A(r);
        b2 += W(r, 1) * A(r);
    }
    const long n = std::lround((hi - lo) / step);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d arg(lo, lo);
    for (long i = 0; i <= n; ++i) {
        const double x = lo + static_cast<double>(i) * step;
        for (long j = 0; j <= n; ++j) {
            const double y = lo + static_cast<double>(j) * step;
            const double f = g11 * x * x + 2 * g12 * x * y + g22 * y * y - 2 * (b1 * x + b2 * y);
            if (f < best) {
                best = f;
                arg = {x, y};
            }
        }
    }
    return arg;
}

double sample_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

CalibrationFixture calibration_fixture(std::size_t n_links, std::uint64_t seed) {
    std::vector<Facet> facets = box_walls(10.0, 7.0, 3.0, "drywall", "wooden_cupboard", "drywall");
    facets.push_back(rect_x("partition_glass", "glass", 5.0, 0.5, 4.5, 0.2, 2.6));
    facets.push_back(rect_y("partition_drywall", "drywall", 5.2, 1.0, 8.0, 0.3, 2.7));
    facets.push_back(rect_x("cupboard", "wooden_cupboard", 7.5, 1.0, 3.0, 0.2, 2.0));

    CalibrationFixture fx;
    fx.env = EnvironmentMap("calibration office", std::move(facets));
    fx.truth = MaterialLibrary({{"drywall", 28.0, "truth", 7.3, 4.6},
                                {"glass", 28.0, "truth", 4.2, 2.9},
                                {"wooden_cupboard", 28.0, "truth", 3.1, 5.4}});
    fx.initial = office_library();

    std::mt19937_64 rng(seed);
    const Vec3 lo{0.3, 0.3, 0.5}, hi{9.7, 6.7, 2.5};
    while (fx.links.size() < n_links) {
        const Vec3 tx = random_point_clear_of_planes(rng, fx.env, lo, hi, 0.1);
        const Vec3 rx = random_point_clear_of_planes(rng, fx.env, lo, hi, 0.1);
        if (distance(tx, rx) < 1.5) continue;
        fx.links.push_back({"link" + std::to_string(fx.links.size()), tx, rx, {}, {}});
    }
    fx.synth.tracer.frequency_ghz = 28.0;
    fx.synth.tracer.max_reflections = 2;
    fx.synth.tracer.angular_spacing_deg = 0.5;
    fx.synth.tx_antenna = AntennaPattern::make_directional(20.0, 10.0, 10.0);
    fx.synth.rx_antenna = AntennaPattern::make_directional(20.0, 10.0, 10.0);
    fx.calibration.tracer = fx.synth.tracer;
    fx.calibration.bandwidth_ghz = 1.0;
    return fx;
}

}  // namespace oracle
