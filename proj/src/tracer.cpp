#include "mmray/tracer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mmray/errors.hpp"
#include "mmray/log.hpp"

namespace mmray {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

// Geometric duplicates: interaction points closer than this are the same path.
constexpr double kDuplicateTolerance = 1e-7;

// SBR tube slack: reception-sphere radius and facet-edge margin are grown by
// this factor over the nominal tube radius.
constexpr double kTubeSlack = 1.5;

// Grazing incidence inflates the in-plane footprint of a tube by 1/cos; cap it.
constexpr double kMinFootprintCosine = 0.05;

int clamp_reflections(int requested) { return std::clamp(requested, 0, kMaxReflectionOrder); }

double incidence_angle_deg(const Vec3& dir, const Facet& f) {
    return std::acos(std::min(1.0, std::abs(dot(dir, f.normal())))) * kRadToDeg;
}

/// Build a path through `points` (tx, middle..., rx). `middle_facets[i]` is
/// the facet at points[i + 1], interacting with kind `kind`.
std::optional<PropagationPath> assemble(const std::vector<Vec3>& points,
                                        std::span<const FacetIndex> middle_facets,
                                        InteractionKind kind, const EnvironmentMap& env,
                                        int max_penetrations) {
    const std::size_t segments = points.size() - 1;
    PropagationPath path;
    path.tx = points.front();
    path.rx = points.back();
    int penetrations = 0;
    for (std::size_t s = 0; s < segments; ++s) {
        const Vec3& a = points[s];
        const Vec3& b = points[s + 1];
        const double len = distance(a, b);
        if (!(len > kGeometryEpsilon)) return std::nullopt;
        path.length_m += len;
        const Vec3 dir = (b - a) / len;

        std::array<FacetIndex, 2> exclude{kNoFacet, kNoFacet};
        if (s > 0) exclude[0] = middle_facets[s - 1];
        if (s < middle_facets.size()) exclude[1] = middle_facets[s];
        for (const Obstruction& o : segment_obstructions(a, b, env, exclude)) {
            if (++penetrations > max_penetrations) return std::nullopt;
            path.interactions.push_back({InteractionKind::penetration, o.facet, o.facet_id,
                                         o.material_id, o.point,
                                         incidence_angle_deg(dir, env.facet(o.facet)), 0.0});
        }
        if (s + 1 < segments) {
            const Facet& f = env.facet(middle_facets[s]);
            path.interactions.push_back({kind, middle_facets[s], f.id(), f.material(), b,
                                         incidence_angle_deg(dir, f), 0.0});
        }
    }
    path.aod = direction_angles(normalized(points[1] - points[0]));
    path.aoa = direction_angles(normalized(points[segments - 1] - points[segments]));
    return path;
}

/// Reason the path cannot be priced with `lib`, or nullopt.
std::optional<std::string> inadmissible(const PropagationPath& path, const MaterialLibrary& lib,
                                        double f, bool strict) {
    for (const Interaction& it : path.interactions) {
        const Material* m = nullptr;
        try {
            m = &lib.lookup(it.material_id, f);
        } catch (const MissingMaterial&) {
            if (strict) throw;
            std::ostringstream os;
            os << "material '" << it.material_id << "' missing at " << f << " GHz";
            return os.str();
        }
        const bool ok = it.kind == InteractionKind::reflection    ? m->reflection_loss_db.has_value()
                        : it.kind == InteractionKind::penetration ? m->penetration_loss_db.has_value()
                                                                  : m->scattering_coefficient > 0.0;
        if (!ok) {
            std::ostringstream os;
            os << "material '" << it.material_id << "' has no calibrated " << to_string(it.kind)
               << " loss at " << f << " GHz";
            if (strict) throw UncalibratedInteraction(os.str());
            return os.str();
        }
    }
    return std::nullopt;
}

std::vector<PropagationPath> keep_admissible(std::vector<PropagationPath> paths,
                                             const MaterialLibrary& lib,
                                             const TracerConfig& config) {
    std::map<std::string, int> dropped;
    std::vector<PropagationPath> out;
    out.reserve(paths.size());
    for (PropagationPath& p : paths) {
        if (auto why = inadmissible(p, lib, config.frequency_ghz, config.strict_materials))
            ++dropped[*why];
        else
            out.push_back(std::move(p));
    }
    for (const auto& [why, n] : dropped)
        log_warning("dropped " + std::to_string(n) + " path(s): " + why);
    return out;
}

std::vector<std::string> facet_ids(const PropagationPath& p) {
    std::vector<std::string> ids;
    ids.reserve(p.interactions.size());
    for (const Interaction& it : p.interactions) ids.push_back(it.facet_id);
    return ids;
}

bool same_geometry(const PropagationPath& a, const PropagationPath& b) {
    auto anchors = [](const PropagationPath& p) {
        std::vector<Vec3> pts;
        for (const Interaction& it : p.interactions)
            if (it.kind != InteractionKind::penetration) pts.push_back(it.point);
        return pts;
    };
    const auto pa = anchors(a);
    const auto pb = anchors(b);
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (distance(pa[i], pb[i]) > kDuplicateTolerance) return false;
    return true;
}

/// Sort by length and collapse coincident geometry, keeping the
/// lexicographically smallest facet-id sequence.
std::vector<PropagationPath> sort_and_dedupe(std::vector<PropagationPath> paths) {
    std::vector<std::pair<std::vector<std::string>, PropagationPath>> keyed;
    keyed.reserve(paths.size());
    for (PropagationPath& p : paths) {
        auto ids = facet_ids(p);
        keyed.emplace_back(std::move(ids), std::move(p));
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.second.length_m != y.second.length_m) return x.second.length_m < y.second.length_m;
        return x.first < y.first;
    });
    std::vector<std::pair<std::vector<std::string>, PropagationPath>> kept;
    for (auto& entry : keyed) {
        bool duplicate = false;
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
            if (entry.second.length_m - it->second.length_m > kDuplicateTolerance) break;
            if (same_geometry(entry.second, it->second)) {
                if (entry.first < it->first) *it = std::move(entry);
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(std::move(entry));
    }
    std::vector<PropagationPath> out;
    out.reserve(kept.size());
    for (auto& entry : kept) out.push_back(std::move(entry.second));
    return out;
}

void check_endpoints(const EnvironmentMap& env, const Vec3& tx, const Vec3& rx) {
    if (distance(tx, rx) <= kGeometryEpsilon)
        throw std::invalid_argument("tx and rx must be distinct");
    for (const Facet& f : env.facets()) {
        if (std::abs(f.signed_distance(tx)) <= 1e-6 || std::abs(f.signed_distance(rx)) <= 1e-6)
            throw std::invalid_argument("tx/rx lies on the plane of facet '" + f.id() + "'");
    }
}

}  // namespace

const char* to_string(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::reflection: return "reflection";
        case InteractionKind::penetration: return "penetration";
        case InteractionKind::scattering: return "scattering";
    }
    return "?";
}

Angles direction_angles(const Vec3& d) {
    return {std::atan2(d.y, d.x) * kRadToDeg, std::asin(std::clamp(d.z, -1.0, 1.0)) * kRadToDeg};
}

Vec3 angles_direction(const Angles& a) {
    const double az = a.azimuth_deg * kDegToRad;
    const double el = a.elevation_deg * kDegToRad;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

int PropagationPath::count(InteractionKind kind) const {
    return static_cast<int>(std::count_if(interactions.begin(), interactions.end(),
                                          [kind](const Interaction& i) { return i.kind == kind; }));
}

std::vector<Vec3> PropagationPath::vertices() const {
    std::vector<Vec3> pts{tx};
    for (const Interaction& i : interactions) pts.push_back(i.point);
    pts.push_back(rx);
    return pts;
}

std::vector<FacetIndex> PropagationPath::reflection_sequence() const {
    std::vector<FacetIndex> seq;
    for (const Interaction& i : interactions)
        if (i.kind == InteractionKind::reflection) seq.push_back(i.facet);
    return seq;
}

std::string PropagationPath::interaction_chain() const {
    std::string out;
    for (const Interaction& i : interactions) {
        if (!out.empty()) out += ';';
        out += i.material_id;
        out += ':';
        out += to_string(i.kind);
    }
    return out;
}

std::optional<PropagationPath> refine_path(std::span<const FacetIndex> facet_sequence,
                                           const Vec3& tx, const Vec3& rx,
                                           const EnvironmentMap& env, int max_penetrations) {
    const std::size_t n = facet_sequence.size();
    if (n > static_cast<std::size_t>(kMaxReflectionOrder)) return std::nullopt;

    std::vector<Vec3> images(n + 1);
    images[0] = tx;
    for (std::size_t k = 0; k < n; ++k)
        images[k + 1] = mirror_point(images[k], env.facet(facet_sequence[k]));

    std::vector<Vec3> points(n + 2);
    points.front() = tx;
    points.back() = rx;
    Vec3 target = rx;
    for (std::size_t k = n; k-- > 0;) {
        const Facet& f = env.facet(facet_sequence[k]);
        const Vec3& image = images[k + 1];
        const double da = f.signed_distance(target);
        const double db = f.signed_distance(image);
        if (std::abs(da) <= kGeometryEpsilon || std::abs(db) <= kGeometryEpsilon) return std::nullopt;
        if ((da > 0.0) == (db > 0.0)) return std::nullopt;
        const Vec3 p = target + (image - target) * (da / (da - db));
        if (!f.contains(p)) return std::nullopt;
        points[k + 1] = p;
        target = p;
    }
    return assemble(points, facet_sequence, InteractionKind::reflection, env, max_penetrations);
}

std::vector<std::vector<FacetIndex>> sbr_candidates(const EnvironmentMap& env, const Vec3& tx,
                                                    const Vec3& rx, const TracerConfig& config) {
    const LaunchGrid& grid = launch_grid(config.angular_spacing_deg);
    const int max_reflections = clamp_reflections(config.max_reflections);
    const int max_penetrations = std::max(0, config.max_penetrations);
    if (max_reflections == 0 || env.empty()) return {};

    // Each launched ray stands for a tube whose angular radius is the
    // circumradius of the coarsest tessellation triangle: r = d * dtheta / sqrt(3).
    const double tube = grid.max_edge_deg * kDegToRad / std::sqrt(3.0) * kTubeSlack;

    struct Node {
        Vec3 origin;
        Vec3 dir;
        double travelled = 0.0;
        int penetrations = 0;
        FacetIndex skip = kNoFacet;
        std::array<FacetIndex, kMaxReflectionOrder> seq{};
        int depth = 0;
    };

    struct TubeHit {
        double t;
        FacetIndex facet;
        bool deep;
    };

    std::set<std::vector<FacetIndex>> found;
    std::vector<Node> stack;
    std::vector<TubeHit> hits;
    const std::vector<Facet>& facets = env.facets();

    for (const Vec3& launch : grid.directions) {
        stack.push_back({tx, launch});
        while (!stack.empty()) {
            const Node node = stack.back();
            stack.pop_back();

            // Facets the tube touches, up to and including the first one it
            // hits squarely. Each spawns a reflection; the ray itself carries
            // on through the square hit.
            hits.clear();
            double block_t = std::numeric_limits<double>::infinity();
            for (FacetIndex i = 0; i < facets.size(); ++i) {
                if (i == node.skip) continue;
                const Facet& f = facets[i];
                const auto t = f.plane_distance(node.origin, node.dir);
                if (!t) continue;
                const double cosine = std::max(std::abs(dot(node.dir, f.normal())), kMinFootprintCosine);
                // Near a corner the tube already overlaps planes just behind its
                // origin; those may still be the next reflector of the exact path.
                const bool behind = *t <= kGeometryEpsilon;
                if (behind && *t < -tube * node.travelled / cosine) continue;
                const Vec3 p = node.origin + node.dir * *t;
                const double margin = tube * (node.travelled + std::max(*t, 0.0)) / cosine;
                const double clearance = f.edge_clearance(p);
                if (clearance < -margin) continue;
                const bool deep = !behind && clearance > margin;
                hits.push_back({*t, i, deep});
                if (deep) block_t = std::min(block_t, *t);
            }
            const double reach = block_t + kGeometryEpsilon * std::max(1.0, block_t);
            std::erase_if(hits, [reach](const TubeHit& h) { return h.t > reach; });

            if (node.depth > 0) {
                const double s = std::clamp(dot(rx - node.origin, node.dir), 0.0, block_t);
                const Vec3 closest = node.origin + node.dir * s;
                if (distance(rx, closest) <= tube * (node.travelled + s))
                    found.emplace(node.seq.begin(), node.seq.begin() + node.depth);
            }
            if (hits.empty()) continue;

            if (node.depth < max_reflections) {
                for (const TubeHit& h : hits) {
                    Node r = node;
                    r.origin = node.origin + node.dir * h.t;
                    r.dir = mirror_direction(node.dir, facets[h.facet]);
                    r.travelled += h.t;
                    r.skip = h.facet;
                    r.seq[r.depth++] = h.facet;
                    stack.push_back(r);
                }
            }
            if (std::isfinite(block_t) && node.penetrations < max_penetrations) {
                const auto blocker = std::find_if(hits.begin(), hits.end(),
                                                  [block_t](const TubeHit& h) { return h.deep && h.t == block_t; });
                Node t = node;
                t.origin = node.origin + node.dir * block_t;
                t.travelled += block_t;
                t.skip = blocker->facet;
                t.penetrations = node.penetrations + 1;
                stack.push_back(t);
            }
        }
    }
    return {found.begin(), found.end()};
}

std::vector<PropagationPath> trace_paths(const EnvironmentMap& env, const MaterialLibrary& lib,
                                         const Vec3& tx, const Vec3& rx,
                                         const TracerConfig& config) {
    if (!(config.angular_spacing_deg >= 0.05 && config.angular_spacing_deg <= 10.0))
        throw std::invalid_argument("angular spacing must be within [0.05, 10] degrees");
    check_endpoints(env, tx, rx);

    std::vector<PropagationPath> paths;
    if (auto los = refine_path({}, tx, rx, env, config.max_penetrations)) paths.push_back(*los);
    for (const auto& seq : sbr_candidates(env, tx, rx, config))
        if (auto p = refine_path(seq, tx, rx, env, config.max_penetrations))
            paths.push_back(std::move(*p));
    return sort_and_dedupe(keep_admissible(std::move(paths), lib, config));
}

std::vector<PropagationPath> image_method_exhaustive(const EnvironmentMap& env,
                                                     const MaterialLibrary& lib, const Vec3& tx,
                                                     const Vec3& rx, int max_order,
                                                     const TracerConfig& config) {
    if (env.size() > kExhaustiveFacetLimit)
        throw std::invalid_argument("exhaustive image method limited to " +
                                    std::to_string(kExhaustiveFacetLimit) + " facets");
    if (max_order < 0 || max_order > 3)
        throw std::invalid_argument("exhaustive image method supports orders 0..3");
    check_endpoints(env, tx, rx);

    std::vector<PropagationPath> paths;
    std::vector<FacetIndex> seq;
    auto recurse = [&](auto&& self) -> void {
        if (auto p = refine_path(seq, tx, rx, env, config.max_penetrations)) paths.push_back(*p);
        if (seq.size() == static_cast<std::size_t>(max_order)) return;
        for (FacetIndex i = 0; i < env.size(); ++i) {
            if (!seq.empty() && seq.back() == i) continue;
            seq.push_back(i);
            self(self);
            seq.pop_back();
        }
    };
    recurse(recurse);
    return sort_and_dedupe(keep_admissible(std::move(paths), lib, config));
}

std::vector<Vec3> facet_grid_samples(const Facet& facet, double pitch_m) {
    if (!(pitch_m > 0.0)) throw std::invalid_argument("scatter grid pitch must be positive");
    const auto& v = facet.vertices();
    const Vec3 u = normalized(v[1] - v[0]);
    const Vec3 w = cross(facet.normal(), u);
    double umin = 0, umax = 0, wmin = 0, wmax = 0;
    for (const Vec3& p : v) {
        const double pu = dot(p - v[0], u);
        const double pw = dot(p - v[0], w);
        umin = std::min(umin, pu);
        umax = std::max(umax, pu);
        wmin = std::min(wmin, pw);
        wmax = std::max(wmax, pw);
    }
    const auto cells = [pitch_m](double extent) {
        return static_cast<int>(std::ceil(extent / pitch_m - 1e-9));
    };
    std::vector<Vec3> samples;
    const int nu = cells(umax - umin);
    const int nw = cells(wmax - wmin);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nw; ++j) {
            const Vec3 p = v[0] + u * (umin + (i + 0.5) * pitch_m) + w * (wmin + (j + 0.5) * pitch_m);
            if (facet.contains(p)) samples.push_back(p);
        }
    return samples;
}

std::vector<PropagationPath> scatter_paths(const EnvironmentMap& env, const MaterialLibrary& lib,
                                           const Vec3& tx, const Vec3& rx,
                                           const TracerConfig& config) {
    check_endpoints(env, tx, rx);
    std::vector<PropagationPath> paths;
    for (FacetIndex fi = 0; fi < env.size(); ++fi) {
        const Facet& f = env.facet(fi);
        const Material* m = nullptr;
        try {
            m = &lib.lookup(f.material(), config.frequency_ghz);
        } catch (const MissingMaterial&) {
            if (config.strict_materials) throw;
            log_warning("scattering skipped for facet '" + f.id() + "': material '" + f.material() +
                        "' missing");
            continue;
        }
        if (!(m->scattering_coefficient > 0.0)) continue;
        const double dt = f.signed_distance(tx);
        const double dr = f.signed_distance(rx);
        if ((dt > 0.0) != (dr > 0.0)) continue;

        const FacetIndex middle[] = {fi};
        for (const Vec3& s : facet_grid_samples(f, config.scatter_grid_m)) {
            auto path = assemble({tx, s, rx}, middle, InteractionKind::scattering, env,
                                 config.max_penetrations);
            if (!path) continue;
            const Vec3 incoming = normalized(s - tx);
            const Vec3 outgoing = normalized(rx - s);
            for (Interaction& it : path->interactions)
                if (it.kind == InteractionKind::scattering)
                    it.rebound_angle_deg =
                        angle_between(mirror_direction(incoming, f), outgoing) * kRadToDeg;
            paths.push_back(std::move(*path));
        }
    }
    paths = keep_admissible(std::move(paths), lib, config);
    std::stable_sort(paths.begin(), paths.end(), [](const PropagationPath& a, const PropagationPath& b) {
        return a.length_m < b.length_m;
    });
    return paths;
}

}  // namespace mmray
