#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmray/vec3.hpp"

namespace mmray {

/// Single geometric tolerance (meters) for containment, plane-side tests and
/// self-intersection exclusion.
inline constexpr double kGeometryEpsilon = 1e-9;

using FacetIndex = std::size_t;
inline constexpr FacetIndex kNoFacet = std::numeric_limits<FacetIndex>::max();

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void expand(const Vec3& p);
    void expand(const Aabb& other);
    bool empty() const { return lo.x > hi.x; }

    /// Slab test against origin + t*dir for t in [t_min, t_max], with the box grown by `pad`.
    bool overlaps_ray(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                      double pad = 0.0) const;
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  ///< unit length

    /// Ray from `from` towards `to`.
    static Ray through(const Vec3& from, const Vec3& to);
};

enum class Side { front, back };

struct Hit {
    Vec3 point;
    double distance = 0.0;
    Side side = Side::front;
};

/// Planar convex polygon with a material assignment. The unit normal follows
/// the right-hand rule over the vertex winding.
class Facet {
  public:
    /// Validates coplanarity, convexity and area; throws std::invalid_argument.
    Facet(std::string id, std::string material, std::vector<Vec3> vertices);

    const std::string& id() const noexcept { return id_; }
    const std::string& material() const noexcept { return material_; }
    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const Vec3& normal() const noexcept { return normal_; }
    double area() const noexcept { return area_; }
    const Aabb& bounds() const noexcept { return bounds_; }

    double signed_distance(const Vec3& p) const { return dot(normal_, p) - offset_; }

    /// Smallest in-plane distance from `p` to an edge line, positive strictly
    /// inside. `p` is assumed to lie on the supporting plane.
    double edge_clearance(const Vec3& p) const;

    bool contains(const Vec3& p, double tolerance = kGeometryEpsilon) const {
        return edge_clearance(p) >= -tolerance;
    }

    /// Distance along `dir` from `origin` to the supporting plane; nullopt when parallel.
    std::optional<double> plane_distance(const Vec3& origin, const Vec3& dir) const;

    Facet translated(const Vec3& offset) const;

  private:
    std::string id_;
    std::string material_;
    std::vector<Vec3> vertices_;
    std::vector<Vec3> edge_normals_;  // in-plane, inward, unit
    Vec3 normal_;
    double offset_ = 0.0;
    double area_ = 0.0;
    Aabb bounds_;
};

/// The simulation world: a flat list of facets plus its bounding box.
class EnvironmentMap {
  public:
    EnvironmentMap() = default;
    /// Throws std::invalid_argument on duplicate facet ids.
    EnvironmentMap(std::string name, std::vector<Facet> facets, std::string materials_ref = {});

    const std::string& name() const noexcept { return name_; }
    const std::string& materials_ref() const noexcept { return materials_ref_; }
    const std::vector<Facet>& facets() const noexcept { return facets_; }
    const Facet& facet(FacetIndex i) const { return facets_.at(i); }
    std::size_t size() const noexcept { return facets_.size(); }
    bool empty() const noexcept { return facets_.empty(); }
    const Aabb& bounding_box() const noexcept { return bounds_; }

    std::optional<FacetIndex> find(const std::string& facet_id) const;

    /// Sorted, unique material ids referenced by the facets.
    std::vector<std::string> material_ids() const;

    EnvironmentMap translated(const Vec3& offset) const;

  private:
    std::string name_;
    std::string materials_ref_;
    std::vector<Facet> facets_;
    std::unordered_map<std::string, FacetIndex> index_;
    Aabb bounds_;
};

std::optional<Hit> ray_facet_intersect(const Ray& ray, const Facet& facet);

/// Reflection of `point` across the facet's infinite supporting plane.
Vec3 mirror_point(const Vec3& point, const Facet& facet);

/// Reflection of a direction vector across the facet plane.
Vec3 mirror_direction(const Vec3& direction, const Facet& facet);

struct Obstruction {
    FacetIndex facet = kNoFacet;
    std::string facet_id;
    std::string material_id;
    Vec3 point;
    double t = 0.0;  ///< parametric position along a->b
};

/// Facets whose interior is crossed strictly between a and b, nearest to `a` first.
std::vector<Obstruction> segment_obstructions(const Vec3& a, const Vec3& b,
                                              const EnvironmentMap& env,
                                              std::span<const FacetIndex> exclude = {});

}  // namespace mmray
