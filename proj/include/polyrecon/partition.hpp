#pragma once

// External-plane classification, the convex polyhedral space, and the
// adaptive binary space partition into convex cells.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyrecon/cell.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/polygon.hpp"

namespace polyrecon {

struct PlaneClassification {
  std::vector<int> external;
  std::vector<int> internal;
  /// Per plane id: the plane oriented so that the other planes lie on its
  /// negative side. Only meaningful for external planes.
  std::vector<Plane> oriented;
};

/// A plane is external when every other plane's footprint boundary points,
/// ignoring those closer than `sigma`, lie on one consistent side of it.
inline PlaneClassification classify_planes(std::span<const DetectedPlane> planes, double sigma) {
  if (planes.size() < 4) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "need at least 4 planes to bound space, got " + std::to_string(planes.size()));
  }
  std::vector<std::vector<Vec3>> boundary;
  boundary.reserve(planes.size());
  for (const auto& p : planes) boundary.push_back(p.footprint.boundary_points());

  PlaneClassification out;
  out.oriented.resize(planes.size());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const Plane& f = planes[i].plane;
    int side = 0;
    bool consistent = true;
    for (std::size_t j = 0; j < planes.size() && consistent; ++j) {
      if (j == i) continue;
      for (const auto& b : boundary[j]) {
        const double d = f.signed_distance(b);
        if (std::abs(d) < sigma) continue;
        const int s = d < 0.0 ? -1 : 1;
        if (side == 0) {
          side = s;
        } else if (s != side) {
          consistent = false;
          break;
        }
      }
    }
    out.oriented[i] = side > 0 ? f.flipped() : f;
    if (consistent && side != 0) {
      out.external.push_back(static_cast<int>(i));
    } else {
      out.internal.push_back(static_cast<int>(i));
    }
  }
  if (out.external.size() < 4) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "only " + std::to_string(out.external.size()) + " external planes found; cannot bound space");
  }
  return out;
}

namespace detail {

inline std::string direction_label(const Vec3& n) {
  const char* axis[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(std::abs(n[a]) - 1.0) < 1e-12) return std::string(n[a] > 0 ? "+" : "-") + axis[a];
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.3g, %.3g, %.3g)", n.x, n.y, n.z);
  return buf;
}

}  // namespace detail

/// Intersection of the external half-spaces. `extent` is a box known to hold
/// the object; anything reaching 50 diagonals beyond it counts as unbounded.
inline ConvexCell build_convex_space(const PlaneClassification& cls, const Aabb& extent) {
  const double diag = std::max(extent.diagonal(), 1e-300);
  const Vec3 c = extent.center();
  const Vec3 r{50.0 * diag, 50.0 * diag, 50.0 * diag};
  ConvexCell cell = make_box(c - r, c + r);
  const double eps = 1e-9 * diag;
  for (int id : cls.external) {
    auto [neg, pos] = clip_cell(cell, cls.oriented[id], id, eps);
    if (!neg) throw Error(ErrorKind::DegenerateConfiguration, "external half-spaces have empty intersection");
    cell = std::move(*neg);
  }
  std::vector<std::string> open;
  for (std::size_t k = 0; k < cell.faces.size(); ++k) {
    if (cell.source_planes[k] == kNoSource) open.push_back(detail::direction_label(cell.faces[k].plane.normal));
  }
  if (!open.empty()) {
    std::string msg = "convex space is unbounded towards";
    for (const auto& o : open) msg += " " + o;
    throw Error(ErrorKind::UnboundedSpace, msg);
  }
  return cell;
}

struct Adjacency {
  int cell_a = -1;  // negative side of the source plane
  int cell_b = -1;
  ConvexPolygon polygon;  // normal points from cell_a into cell_b
  int source = kNoSource;
};

struct HullFace {
  int cell = -1;
  int face = -1;  // index into cells[cell].faces
  int source = kNoSource;
};

struct CellComplex {
  ConvexCell space;
  std::vector<ConvexCell> cells;
  std::vector<Adjacency> adjacency;
  std::vector<HullFace> hull_faces;
  /// Planes in the order they were applied as splitters (depth-first).
  std::vector<int> split_order;
};

struct PartitionParams {
  double tolerance = 0.0;  // band around a splitter treated as "on" it; auto = 1e-6 x space diagonal
  double min_volume_fraction = 1e-10;
};

/// Footprint pieces of one plane restricted to a region.
struct ClippedFootprint {
  int id = -1;
  Plane plane;
  std::vector<std::vector<Vec3>> pieces;

  double area() const {
    double a = 0.0;
    for (const auto& r : pieces) a += std::abs(0.5 * dot(ring_area_vector(r), plane.normal));
    return a;
  }
};

namespace detail {

inline std::vector<std::vector<Vec3>> clip_pieces(const std::vector<std::vector<Vec3>>& pieces, const Plane& keep_below) {
  std::vector<std::vector<Vec3>> out;
  for (const auto& r : pieces) {
    auto c = clip_ring_below(r, keep_below);
    if (c.size() >= 3) out.push_back(std::move(c));
  }
  return out;
}

inline ClippedFootprint clip_footprint(const DetectedPlane& dp, int id, const ConvexCell& region) {
  ClippedFootprint cf;
  cf.id = id;
  cf.plane = dp.plane;
  for (const auto& t : dp.footprint.triangles()) cf.pieces.push_back({t[0], t[1], t[2]});
  for (const auto& f : region.faces) cf.pieces = clip_pieces(cf.pieces, f.plane);
  return cf;
}

/// Signed-distance range of a clipped footprint with respect to `plane`.
inline std::pair<double, double> distance_range(const ClippedFootprint& cf, const Plane& plane) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : cf.pieces)
    for (const auto& v : r) {
      const double d = plane.signed_distance(v);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return {lo, hi};
}

/// counts[i] = number of other footprints that plane i, expanded across the
/// region, cuts by more than `tol` on both sides.
inline std::vector<int> count_crossings(const std::vector<ClippedFootprint>& fps, double tol) {
  std::vector<int> counts(fps.size(), 0);
  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = 0; j < fps.size(); ++j) {
      if (i == j || fps[j].pieces.empty()) continue;
      const auto [lo, hi] = distance_range(fps[j], fps[i].plane);
      if (lo < -tol && hi > tol) ++counts[i];
    }
  }
  return counts;
}

}  // namespace detail

/// Intersection counts of the planes' footprints inside `region`.
inline std::vector<int> count_intersections(std::span<const DetectedPlane> planes, const ConvexCell& region, double tol) {
  std::vector<ClippedFootprint> fps;
  for (std::size_t i = 0; i < planes.size(); ++i) fps.push_back(detail::clip_footprint(planes[i], static_cast<int>(i), region));
  return detail::count_crossings(fps, tol);
}

namespace detail {

class Partitioner {
 public:
  Partitioner(const ConvexCell& space, const PartitionParams& params)
      : space_(space), params_(params), min_volume_(params.min_volume_fraction * space.volume()) {}

  void run(std::vector<ClippedFootprint> resident, CellComplex& out) {
    split(space_, std::move(resident), out);
  }

 private:
  void split(const ConvexCell& region, std::vector<ClippedFootprint> resident, CellComplex& out) {
    for (;;) {
      std::erase_if(resident, [](const ClippedFootprint& f) { return f.pieces.empty(); });
      if (resident.empty()) {
        out.cells.push_back(region);
        return;
      }
      const auto counts = count_crossings(resident, params_.tolerance);
      std::size_t best = 0;
      double best_area = resident[0].area();
      for (std::size_t k = 1; k < resident.size(); ++k) {
        const double a = resident[k].area();
        if (counts[k] < counts[best] ||
            (counts[k] == counts[best] && (a > best_area || (a == best_area && resident[k].id < resident[best].id)))) {
          best = k;
          best_area = a;
        }
      }
      const ClippedFootprint splitter = resident[best];
      resident.erase(resident.begin() + static_cast<std::ptrdiff_t>(best));
      auto [neg, pos] = clip_cell(region, splitter.plane, splitter.id);
      if (!neg || !pos || neg->volume() < min_volume_ || pos->volume() < min_volume_) continue;
      out.split_order.push_back(splitter.id);

      const Plane below = splitter.plane;
      const Plane above = splitter.plane.flipped();
      std::vector<ClippedFootprint> rneg, rpos;
      for (const auto& f : resident) {
        const auto [lo, hi] = distance_range(f, splitter.plane);
        if (lo < -params_.tolerance) {
          ClippedFootprint c{f.id, f.plane, clip_pieces(f.pieces, below)};
          if (!c.pieces.empty()) rneg.push_back(std::move(c));
        }
        if (hi > params_.tolerance) {
          ClippedFootprint c{f.id, f.plane, clip_pieces(f.pieces, above)};
          if (!c.pieces.empty()) rpos.push_back(std::move(c));
        }
      }
      split(*neg, std::move(rneg), out);
      split(*pos, std::move(rpos), out);
      return;
    }
  }

  const ConvexCell& space_;
  PartitionParams params_;
  double min_volume_;
};

}  // namespace detail

/// Adjacency between cells through faces cut by the same splitter, found by
/// intersecting opposite-facing faces in the plane; plus the hull faces.
inline void assemble_adjacency(CellComplex& cx, const std::vector<char>& is_internal) {
  cx.adjacency.clear();
  cx.hull_faces.clear();
  struct Ref {
    int cell, face;
  };
  std::map<int, std::pair<std::vector<Ref>, std::vector<Ref>>> buckets;  // source -> (+n faces, -n faces)
  std::map<int, Plane> source_plane;
  for (std::size_t c = 0; c < cx.cells.size(); ++c) {
    const auto& cell = cx.cells[c];
    for (std::size_t k = 0; k < cell.faces.size(); ++k) {
      const int s = cell.source_planes[k];
      if (s >= 0 && s < static_cast<int>(is_internal.size()) && is_internal[s]) {
        const Plane& fp = cell.faces[k].plane;
        auto it = source_plane.find(s);
        if (it == source_plane.end()) it = source_plane.emplace(s, fp).first;
        auto& b = buckets[s];
        (dot(fp.normal, it->second.normal) > 0.0 ? b.first : b.second).push_back({int(c), int(k)});
      } else {
        cx.hull_faces.push_back({int(c), int(k), s});
      }
    }
  }
  const double area_floor = 1e-14 * std::pow(std::max(cx.space.bounds().diagonal(), 1e-300), 2);
  for (const auto& [s, groups] : buckets) {
    const Plane& ref = source_plane.at(s);
    const PlaneFrame frame(ref);
    auto flat = [&](const std::vector<Vec3>& ring, bool reverse) {
      std::vector<Vec2> out;
      for (const auto& v : ring) out.push_back(frame.to_2d(v));
      if (reverse) std::reverse(out.begin(), out.end());
      return out;
    };
    for (const auto& a : groups.first) {
      const auto ra = flat(cx.cells[a.cell].faces[a.face].vertices, false);
      for (const auto& b : groups.second) {
        const auto rb = flat(cx.cells[b.cell].faces[b.face].vertices, true);
        const auto inter = intersect_convex_2d(ra, rb);
        if (inter.size() < 3 || polygon_area_2d(inter) <= area_floor) continue;
        Adjacency adj;
        adj.cell_a = a.cell;
        adj.cell_b = b.cell;
        adj.source = s;
        adj.polygon.plane = cx.cells[a.cell].faces[a.face].plane;
        for (const auto& q : inter) adj.polygon.vertices.push_back(frame.to_3d(q));
        cx.adjacency.push_back(std::move(adj));
      }
    }
  }
}

/// Recursive splitting of `space` by the internal planes, cheapest first.
inline CellComplex adaptive_partition(const ConvexCell& space, std::span<const DetectedPlane> planes,
                                      std::span<const int> internal, PartitionParams params = {}) {
  if (params.tolerance <= 0.0) params.tolerance = 1e-6 * space.bounds().diagonal();
  CellComplex cx;
  cx.space = space;
  std::vector<ClippedFootprint> resident;
  for (int id : internal) {
    auto cf = detail::clip_footprint(planes[id], id, space);
    if (!cf.pieces.empty()) resident.push_back(std::move(cf));
  }
  detail::Partitioner(space, params).run(std::move(resident), cx);
  std::vector<char> is_internal(planes.size(), 0);
  for (int id : internal) is_internal[id] = 1;
  assemble_adjacency(cx, is_internal);
  return cx;
}

}  // namespace polyrecon
