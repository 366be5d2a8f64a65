#include "mmray/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mmray {

void Aabb::expand(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Aabb::expand(const Aabb& other) {
    if (other.empty()) return;
    expand(other.lo);
    expand(other.hi);
}

bool Aabb::overlaps_ray(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                        double pad) const {
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double l[3] = {lo.x - pad, lo.y - pad, lo.z - pad};
    const double h[3] = {hi.x + pad, hi.y + pad, hi.z + pad};
    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(d[axis]) < 1e-300) {
            if (o[axis] < l[axis] || o[axis] > h[axis]) return false;
            continue;
        }
        const double inv = 1.0 / d[axis];
        double t0 = (l[axis] - o[axis]) * inv;
        double t1 = (h[axis] - o[axis]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max) return false;
    }
    return true;
}

Ray Ray::through(const Vec3& from, const Vec3& to) { return {from, normalized(to - from)}; }

Facet::Facet(std::string id, std::string material, std::vector<Vec3> vertices)
    : id_(std::move(id)), material_(std::move(material)), vertices_(std::move(vertices)) {
    const std::size_t n = vertices_.size();
    if (n < 3) throw std::invalid_argument("facet '" + id_ + "': needs at least 3 vertices");

    // Newell's method: robust normal for any planar polygon.
    Vec3 newell;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& a = vertices_[i];
        const Vec3& b = vertices_[(i + 1) % n];
        newell += cross(a, b);
    }
    area_ = 0.5 * norm(newell);
    if (!(area_ > 1e-12)) throw std::invalid_argument("facet '" + id_ + "': degenerate (zero area)");
    normal_ = normalized(newell);
    offset_ = dot(normal_, vertices_[0]);

    for (const Vec3& v : vertices_) {
        if (std::abs(dot(normal_, v) - offset_) > kGeometryEpsilon)
            throw std::invalid_argument("facet '" + id_ + "': vertices are not coplanar");
        bounds_.expand(v);
    }

    edge_normals_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 e = vertices_[(i + 1) % n] - vertices_[i];
        const double len = norm(e);
        if (len <= kGeometryEpsilon)
            throw std::invalid_argument("facet '" + id_ + "': repeated vertex");
        edge_normals_.push_back(cross(normal_, e) / len);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 e0 = vertices_[(i + 1) % n] - vertices_[i];
        const Vec3 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
        if (dot(cross(e0, e1), normal_) < -kGeometryEpsilon)
            throw std::invalid_argument("facet '" + id_ + "': polygon is not convex");
    }
}

double Facet::edge_clearance(const Vec3& p) const {
    double clearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        clearance = std::min(clearance, dot(p - vertices_[i], edge_normals_[i]));
    return clearance;
}

std::optional<double> Facet::plane_distance(const Vec3& origin, const Vec3& dir) const {
    const double denom = dot(normal_, dir);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    return (offset_ - dot(normal_, origin)) / denom;
}

Facet Facet::translated(const Vec3& offset) const {
    std::vector<Vec3> moved = vertices_;
    for (Vec3& v : moved) v += offset;
    return Facet(id_, material_, std::move(moved));
}

EnvironmentMap::EnvironmentMap(std::string name, std::vector<Facet> facets,
                               std::string materials_ref)
    : name_(std::move(name)), materials_ref_(std::move(materials_ref)), facets_(std::move(facets)) {
    for (FacetIndex i = 0; i < facets_.size(); ++i) {
        if (!index_.emplace(facets_[i].id(), i).second)
            throw std::invalid_argument("duplicate facet id '" + facets_[i].id() + "'");
        bounds_.expand(facets_[i].bounds());
    }
}

std::optional<FacetIndex> EnvironmentMap::find(const std::string& facet_id) const {
    const auto it = index_.find(facet_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> EnvironmentMap::material_ids() const {
    std::set<std::string> ids;
    for (const Facet& f : facets_) ids.insert(f.material());
    return {ids.begin(), ids.end()};
}

EnvironmentMap EnvironmentMap::translated(const Vec3& offset) const {
    std::vector<Facet> moved;
    moved.reserve(facets_.size());
    for (const Facet& f : facets_) moved.push_back(f.translated(offset));
    return EnvironmentMap(name_, std::move(moved), materials_ref_);
}

std::optional<Hit> ray_facet_intersect(const Ray& ray, const Facet& facet) {
    const auto t = facet.plane_distance(ray.origin, ray.direction);
    if (!t || *t <= kGeometryEpsilon) return std::nullopt;
    const Vec3 p = ray.origin + ray.direction * *t;
    if (!facet.contains(p)) return std::nullopt;
    const Side side = dot(ray.direction, facet.normal()) < 0.0 ? Side::front : Side::back;
    return Hit{p, *t, side};
}

Vec3 mirror_point(const Vec3& point, const Facet& facet) {
    return point - facet.normal() * (2.0 * facet.signed_distance(point));
}

Vec3 mirror_direction(const Vec3& direction, const Facet& facet) {
    return direction - facet.normal() * (2.0 * dot(direction, facet.normal()));
}

std::vector<Obstruction> segment_obstructions(const Vec3& a, const Vec3& b,
                                              const EnvironmentMap& env,
                                              std::span<const FacetIndex> exclude) {
    std::vector<Obstruction> out;
    const Vec3 d = b - a;
    constexpr double kLo = kGeometryEpsilon;
    constexpr double kHi = 1.0 - kGeometryEpsilon;
    for (FacetIndex i = 0; i < env.size(); ++i) {
        if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
        const Facet& f = env.facet(i);
        if (!f.bounds().overlaps_ray(a, d, 0.0, 1.0, kGeometryEpsilon)) continue;
        const double da = f.signed_distance(a);
        const double db = f.signed_distance(b);
        if ((da > 0.0) == (db > 0.0) || da == db) continue;
        const double t = da / (da - db);
        if (!(t > kLo && t < kHi)) continue;
        const Vec3 p = a + d * t;
        if (!f.contains(p)) continue;
        out.push_back({i, f.id(), f.material(), p, t});
    }
    std::sort(out.begin(), out.end(), [](const Obstruction& x, const Obstruction& y) {
        return x.t != y.t ? x.t < y.t : x.facet < y.facet;
    });
    return out;
}

}  // namespace mmray
