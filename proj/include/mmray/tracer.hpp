#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmray/geometry.hpp"
#include "mmray/materials.hpp"
#include "mmray/vec3.hpp"

namespace mmray {

/// Hard upper bound on specular reflection order, whatever the configuration says.
inline constexpr int kMaxReflectionOrder = 5;

enum class InteractionKind { reflection, penetration, scattering };

const char* to_string(InteractionKind kind);

struct Interaction {
    InteractionKind kind = InteractionKind::reflection;
    FacetIndex facet = kNoFacet;
    std::string facet_id;
    std::string material_id;
    Vec3 point;
    double incidence_angle_deg = 0.0;  // diagnostics only, losses are angle-independent
    double rebound_angle_deg = 0.0;    // scattering only: angle from the specular direction
};

/// Azimuth from +x towards +y, elevation above the xy-plane; degrees.
struct Angles {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

Angles direction_angles(const Vec3& unit_direction);
Vec3 angles_direction(const Angles& a);

struct PropagationPath {
    Vec3 tx;
    Vec3 rx;
    std::vector<Interaction> interactions;
    double length_m = 0.0;
    Angles aod;  ///< departure direction at tx
    Angles aoa;  ///< direction at rx pointing back along the arriving ray

    int count(InteractionKind kind) const;
    bool is_los() const { return interactions.empty(); }
    /// tx, every interaction point, rx.
    std::vector<Vec3> vertices() const;
    std::vector<FacetIndex> reflection_sequence() const;
    /// `material:kind` tokens joined by ';'.
    std::string interaction_chain() const;
};

struct TracerConfig {
    double frequency_ghz = 28.0;
    int max_reflections = 5;
    double angular_spacing_deg = 0.5;
    int max_penetrations = 3;
    double scatter_grid_m = 0.25;
    /// Abort on missing / uncalibrated materials instead of dropping the path.
    bool strict_materials = false;
};

struct LaunchGrid {
    std::vector<Vec3> directions;
    int subdivision = 1;                ///< icosahedron edge split count
    double max_neighbor_gap_deg = 0.0;  ///< worst nearest-neighbour angle
    double max_edge_deg = 0.0;          ///< longest tessellation edge
};

/// Geodesic icosahedron tessellation with the smallest subdivision whose
/// worst nearest-neighbour gap does not exceed `angular_spacing_deg`.
/// Throws std::invalid_argument outside [0.05, 180] degrees; any spacing at or
/// above the bare icosahedron gap (63.43 deg) returns its 12 vertices.
/// trace_paths itself only accepts [0.05, 10].
const LaunchGrid& launch_grid(double angular_spacing_deg);
std::vector<Vec3> launch_directions(double angular_spacing_deg);

/// Exact specular path for a reflection facet sequence via successive images,
/// or nullopt when geometrically infeasible. Obstructing facets along each leg
/// become penetration interactions; more than `max_penetrations` rejects.
std::optional<PropagationPath> refine_path(std::span<const FacetIndex> facet_sequence,
                                           const Vec3& tx, const Vec3& rx,
                                           const EnvironmentMap& env,
                                           int max_penetrations = 3);

/// Hybrid tracer: SBR launch with reception-sphere capture proposes facet
/// sequences, each of which is refined with the image method. Output sorted by
/// path length.
std::vector<PropagationPath> trace_paths(const EnvironmentMap& env, const MaterialLibrary& lib,
                                         const Vec3& tx, const Vec3& rx,
                                         const TracerConfig& config = {});

/// Reflection sequences proposed by the SBR stage (before refinement).
std::vector<std::vector<FacetIndex>> sbr_candidates(const EnvironmentMap& env, const Vec3& tx,
                                                    const Vec3& rx, const TracerConfig& config);

inline constexpr std::size_t kExhaustiveFacetLimit = 64;

/// Enumerates every facet sequence up to `max_order` (<= 3) and refines each.
std::vector<PropagationPath> image_method_exhaustive(const EnvironmentMap& env,
                                                     const MaterialLibrary& lib, const Vec3& tx,
                                                     const Vec3& rx, int max_order,
                                                     const TracerConfig& config = {});

/// Single-bounce diffuse scattering from facets whose material has S > 0,
/// sampled at the centres of a square grid over each facet.
std::vector<PropagationPath> scatter_paths(const EnvironmentMap& env, const MaterialLibrary& lib,
                                           const Vec3& tx, const Vec3& rx,
                                           const TracerConfig& config = {});

/// Sample points used by scatter_paths for one facet.
std::vector<Vec3> facet_grid_samples(const Facet& facet, double pitch_m);

}  // namespace mmray
