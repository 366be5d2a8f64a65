#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "mmray/tracer.hpp"

namespace mmray {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;

struct Icosahedron {
    std::array<Vec3, 12> vertices;
    std::vector<std::array<int, 3>> faces;   // outward winding
    std::vector<std::array<int, 2>> edges;   // (lo, hi)
};

const Icosahedron& icosahedron() {
    static const Icosahedron ico = [] {
        Icosahedron out;
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const std::array<Vec3, 12> raw = {{{0, 1, phi}, {0, -1, phi}, {0, 1, -phi}, {0, -1, -phi},
                                           {1, phi, 0}, {-1, phi, 0}, {1, -phi, 0}, {-1, -phi, 0},
                                           {phi, 0, 1}, {-phi, 0, 1}, {phi, 0, -1}, {-phi, 0, -1}}};
        for (std::size_t i = 0; i < raw.size(); ++i) out.vertices[i] = normalized(raw[i]);
        auto adjacent = [&](int a, int b) {
            return std::abs(distance(raw[a], raw[b]) - 2.0) < 1e-9;
        };
        for (int a = 0; a < 12; ++a)
            for (int b = a + 1; b < 12; ++b)
                if (adjacent(a, b)) out.edges.push_back({a, b});
        for (int a = 0; a < 12; ++a)
            for (int b = a + 1; b < 12; ++b)
                for (int c = b + 1; c < 12; ++c) {
                    if (!adjacent(a, b) || !adjacent(b, c) || !adjacent(a, c)) continue;
                    const Vec3& A = out.vertices[a];
                    const Vec3& B = out.vertices[b];
                    const Vec3& C = out.vertices[c];
                    if (dot(cross(B - A, C - A), A + B + C) > 0.0)
                        out.faces.push_back({a, b, c});
                    else
                        out.faces.push_back({a, c, b});
                }
        return out;
    }();
    return ico;
}

// Class-I geodesic sphere: every icosahedron edge split into n parts, flat
// lattice points projected onto the unit sphere.
class Geodesic {
  public:
    explicit Geodesic(int n) : n_(n), ico_(icosahedron()) {
        for (std::size_t e = 0; e < ico_.edges.size(); ++e)
            edge_lookup_[{ico_.edges[e][0], ico_.edges[e][1]}] = static_cast<int>(e);
        const int interior_per_face = (n - 1) * (n - 2) / 2;
        edge_base_ = 12;
        face_base_ = edge_base_ + 30 * (n - 1);
        points_.resize(static_cast<std::size_t>(face_base_ + 20 * interior_per_face));

        for (int v = 0; v < 12; ++v) points_[v] = ico_.vertices[v];
        for (std::size_t e = 0; e < ico_.edges.size(); ++e) {
            const Vec3& u = ico_.vertices[ico_.edges[e][0]];
            const Vec3& w = ico_.vertices[ico_.edges[e][1]];
            for (int k = 1; k < n; ++k)
                points_[edge_base_ + static_cast<int>(e) * (n - 1) + (k - 1)] =
                    normalized(u + (w - u) * (static_cast<double>(k) / n));
        }
        for (std::size_t f = 0; f < ico_.faces.size(); ++f) {
            const Vec3& A = ico_.vertices[ico_.faces[f][0]];
            const Vec3& B = ico_.vertices[ico_.faces[f][1]];
            const Vec3& C = ico_.vertices[ico_.faces[f][2]];
            for (int i = 1; i < n; ++i)
                for (int j = 1; i + j < n; ++j)
                    points_[index(static_cast<int>(f), i, j)] =
                        normalized(A + (B - A) * (static_cast<double>(i) / n) +
                                   (C - A) * (static_cast<double>(j) / n));
        }
    }

    const std::vector<Vec3>& points() const { return points_; }

    /// (worst nearest-neighbour angle, longest edge angle), radians.
    std::pair<double, double> spacing() const {
        std::vector<double> nearest(points_.size(), std::numeric_limits<double>::infinity());
        double longest = 0.0;
        auto visit = [&](int a, int b) {
            const double ang = angle_between(points_[a], points_[b]);
            nearest[a] = std::min(nearest[a], ang);
            nearest[b] = std::min(nearest[b], ang);
            longest = std::max(longest, ang);
        };
        for (int f = 0; f < 20; ++f)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; i + j < n_; ++j) {
                    const int p = index(f, i, j);
                    const int q = index(f, i + 1, j);
                    const int r = index(f, i, j + 1);
                    visit(p, q);
                    visit(p, r);
                    visit(q, r);
                }
        return {*std::max_element(nearest.begin(), nearest.end()), longest};
    }

  private:
    // Global index of lattice point (i, j) of face f: A + i/n (B-A) + j/n (C-A).
    int index(int f, int i, int j) const {
        const auto& face = ico_.faces[f];
        if (i == 0 && j == 0) return face[0];
        if (i == n_) return face[1];
        if (j == n_) return face[2];
        if (j == 0) return edge_point(face[0], face[1], i);
        if (i == 0) return edge_point(face[0], face[2], j);
        if (i + j == n_) return edge_point(face[1], face[2], j);
        // interior rows: i in [1, n-2], j in [1, n-1-i]
        const int offset = (i - 1) * (n_ - 1) - (i - 1) * i / 2;
        const int interior_per_face = (n_ - 1) * (n_ - 2) / 2;
        return face_base_ + f * interior_per_face + offset + (j - 1);
    }

    // k-th of n steps from vertex a towards vertex b.
    int edge_point(int a, int b, int k) const {
        const bool forward = a < b;
        const int e = edge_lookup_.at({std::min(a, b), std::max(a, b)});
        const int step = forward ? k : n_ - k;
        return edge_base_ + e * (n_ - 1) + (step - 1);
    }

    int n_;
    const Icosahedron& ico_;
    std::map<std::pair<int, int>, int> edge_lookup_;
    int edge_base_ = 0;
    int face_base_ = 0;
    std::vector<Vec3> points_;
};

std::unique_ptr<LaunchGrid> build_grid(double spacing_deg) {
    auto gap_at = [](int n) {
        const auto [gap, edge] = Geodesic(n).spacing();
        return std::pair{gap * kRadToDeg, edge * kRadToDeg};
    };
    const double base_gap = std::atan(2.0) * kRadToDeg;
    int n = std::max(1, static_cast<int>(std::floor(base_gap / spacing_deg)));
    auto [gap, edge] = gap_at(n);
    if (gap <= spacing_deg) {
        while (n > 1) {
            const auto below = gap_at(n - 1);
            if (below.first > spacing_deg) break;
            --n;
            std::tie(gap, edge) = below;
        }
    } else {
        while (gap > spacing_deg) {
            ++n;
            std::tie(gap, edge) = gap_at(n);
        }
    }
    auto grid = std::make_unique<LaunchGrid>();
    grid->directions = Geodesic(n).points();
    grid->subdivision = n;
    grid->max_neighbor_gap_deg = gap;
    grid->max_edge_deg = edge;
    return grid;
}

}  // namespace

const LaunchGrid& launch_grid(double angular_spacing_deg) {
    if (!(angular_spacing_deg >= 0.05 && angular_spacing_deg <= 180.0))
        throw std::invalid_argument("angular spacing must be within [0.05, 180] degrees");
    static std::mutex mutex;
    static std::map<double, std::unique_ptr<LaunchGrid>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[angular_spacing_deg];
    if (!slot) slot = build_grid(angular_spacing_deg);
    return *slot;
}

std::vector<Vec3> launch_directions(double angular_spacing_deg) {
    return launch_grid(angular_spacing_deg).directions;
}

}  // namespace mmray
