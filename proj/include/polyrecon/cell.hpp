#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "polyrecon/plane.hpp"
#include "polyrecon/polygon.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

/// Plane id used for faces that do not come from a detected plane.
inline constexpr int kNoSource = -1;

/// Convex polyhedron bounded by outward-facing convex polygons.
struct ConvexCell {
  std::vector<ConvexPolygon> faces;
  std::vector<int> source_planes;  // one per face
  Vec3 centroid;

  ConvexCell() = default;
  ConvexCell(std::vector<ConvexPolygon> f, std::vector<int> sources)
      : faces(std::move(f)), source_planes(std::move(sources)) {
    source_planes.resize(faces.size(), kNoSource);
    centroid = compute_centroid();
  }

  /// Unique vertices in lexicographic order.
  std::vector<Vec3> vertices() const {
    std::vector<Vec3> v;
    for (const auto& f : faces) v.insert(v.end(), f.vertices.begin(), f.vertices.end());
    std::sort(v.begin(), v.end(), lex_less);
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  Vec3 vertex_average() const {
    const auto v = vertices();
    Vec3 c;
    for (const auto& p : v) c += p;
    return v.empty() ? c : c / static_cast<double>(v.size());
  }

  Aabb bounds() const {
    Aabb box;
    for (const auto& f : faces)
      for (const auto& p : f.vertices) box.extend(p);
    return box;
  }

  double volume() const {
    const Vec3 o = vertex_average();
    CompensatedSum s;
    for (const auto& f : faces) {
      const auto& r = f.vertices;
      for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        s.add(dot(r[0] - o, cross(r[i] - o, r[i + 1] - o)) / 6.0);
      }
    }
    return s.value();
  }

  Vec3 compute_centroid() const {
    const Vec3 o = vertex_average();
    Vec3 acc;
    double total = 0.0;
    for (const auto& f : faces) {
      const auto& r = f.vertices;
      for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double v = dot(r[0] - o, cross(r[i] - o, r[i + 1] - o)) / 6.0;
        acc += (o + r[0] + r[i] + r[i + 1]) * (v / 4.0);
        total += v;
      }
    }
    return total > 0.0 ? acc / total : o;
  }

  /// Default point-on-plane tolerance: 1e-9 of the bounding-box diagonal.
  double plane_epsilon() const { return 1e-9 * std::max(bounds().diagonal(), 1e-300); }
};

inline ConvexPolygon make_polygon(const Plane& plane, std::vector<Vec3> ring) {
  ConvexPolygon p;
  p.plane = plane;
  p.vertices = std::move(ring);
  return p;
}

/// Axis-aligned box; faces ordered -x, +x, -y, +y, -z, +z.
inline ConvexCell make_box(const Vec3& lo, const Vec3& hi, std::array<int, 6> sources = {-1, -1, -1, -1, -1, -1}) {
  const Vec3 c[8] = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                     {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  std::vector<ConvexPolygon> faces;
  faces.push_back(make_polygon(Plane({-1, 0, 0}, -lo.x), {c[0], c[4], c[7], c[3]}));
  faces.push_back(make_polygon(Plane({1, 0, 0}, hi.x), {c[1], c[2], c[6], c[5]}));
  faces.push_back(make_polygon(Plane({0, -1, 0}, -lo.y), {c[0], c[1], c[5], c[4]}));
  faces.push_back(make_polygon(Plane({0, 1, 0}, hi.y), {c[3], c[7], c[6], c[2]}));
  faces.push_back(make_polygon(Plane({0, 0, -1}, -lo.z), {c[0], c[3], c[2], c[1]}));
  faces.push_back(make_polygon(Plane({0, 0, 1}, hi.z), {c[4], c[5], c[6], c[7]}));
  return ConvexCell(std::move(faces), std::vector<int>(sources.begin(), sources.end()));
}

namespace detail {

struct Vec3Less {
  bool operator()(const Vec3& a, const Vec3& b) const { return lex_less(a, b); }
};

struct EdgeLess {
  bool operator()(const std::pair<Vec3, Vec3>& a, const std::pair<Vec3, Vec3>& b) const {
    if (a.first != b.first) return lex_less(a.first, b.first);
    return lex_less(a.second, b.second);
  }
};

/// Orders coplanar points counter-clockwise (seen from `plane.normal`) by
/// angle about their mean. Points must be in convex position.
inline std::vector<Vec3> sort_ccw(std::vector<Vec3> pts, const Plane& plane) {
  Vec3 c;
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const PlaneFrame frame(plane, c);
  std::vector<std::pair<double, Vec3>> keyed;
  keyed.reserve(pts.size());
  for (const auto& p : pts) {
    const Vec2 q = frame.to_2d(p);
    keyed.emplace_back(std::atan2(q.y, q.x), p);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return lex_less(a.second, b.second);
  });
  std::vector<Vec3> out;
  out.reserve(keyed.size());
  for (auto& k : keyed) out.push_back(k.second);
  return out;
}

}  // namespace detail

/// Directed-edge pairing check: every edge appears once in each direction.
inline bool is_watertight(const std::vector<ConvexPolygon>& faces) {
  std::map<std::pair<Vec3, Vec3>, int, detail::EdgeLess> count;
  for (const auto& f : faces) {
    const auto& r = f.vertices;
    if (r.size() < 3) return false;
    for (std::size_t i = 0; i < r.size(); ++i) ++count[{r[i], r[(i + 1) % r.size()]}];
  }
  for (const auto& [edge, n] : count) {
    if (n != 1) return false;
    auto it = count.find({edge.second, edge.first});
    if (it == count.end() || it->second != 1) return false;
  }
  return true;
}

inline bool is_watertight(const ConvexCell& cell) { return is_watertight(cell.faces); }

/// Every vertex lies on the non-positive side of every face plane within `tol`.
inline bool is_convex(const ConvexCell& cell, double tol) {
  const auto verts = cell.vertices();
  for (const auto& f : cell.faces) {
    for (const auto& v : verts) {
      if (f.plane.signed_distance(v) > tol) return false;
    }
    for (const auto& v : f.vertices) {
      if (std::abs(f.plane.signed_distance(v)) > tol) return false;
    }
  }
  return true;
}

/// Splits `cell` by `plane` into its negative-side and positive-side parts.
/// Vertices within `eps` of the plane count as lying on it. The new face is
/// built once and shared (reversed) by both halves; it carries `source`.
inline std::pair<std::optional<ConvexCell>, std::optional<ConvexCell>> clip_cell(
    const ConvexCell& cell, const Plane& plane, int source = kNoSource, double eps = -1.0) {
  if (eps < 0.0) eps = cell.plane_epsilon();
  auto classify = [&](double d) { return std::abs(d) <= eps ? 0 : (d < 0.0 ? -1 : 1); };

  bool has_neg = false, has_pos = false;
  for (const auto& f : cell.faces) {
    for (const auto& v : f.vertices) {
      const int c = classify(plane.signed_distance(v));
      has_neg |= c < 0;
      has_pos |= c > 0;
    }
  }
  if (!has_pos) return {cell, std::nullopt};
  if (!has_neg) return {std::nullopt, cell};

  std::vector<ConvexPolygon> neg_faces, pos_faces;
  std::vector<int> neg_src, pos_src;
  std::vector<Vec3> cap;
  for (std::size_t fi = 0; fi < cell.faces.size(); ++fi) {
    const auto& ring = cell.faces[fi].vertices;
    const std::size_t n = ring.size();
    std::vector<Vec3> neg, pos;
    bool face_neg = false, face_pos = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& p = ring[i];
      const Vec3& q = ring[(i + 1) % n];
      const double dp = plane.signed_distance(p), dq = plane.signed_distance(q);
      const int cp = classify(dp), cq = classify(dq);
      face_neg |= cp < 0;
      face_pos |= cp > 0;
      if (cp <= 0) neg.push_back(p);
      if (cp >= 0) pos.push_back(p);
      if (cp == 0) cap.push_back(p);
      if ((cp < 0 && cq > 0) || (cp > 0 && cq < 0)) {
        const Vec3 x = edge_plane_crossing(p, dp, q, dq);
        neg.push_back(x);
        pos.push_back(x);
        cap.push_back(x);
      }
    }
    if (face_neg && neg.size() >= 3) {
      neg_faces.push_back(make_polygon(cell.faces[fi].plane, std::move(neg)));
      neg_src.push_back(cell.source_planes[fi]);
    }
    if (face_pos && pos.size() >= 3) {
      pos_faces.push_back(make_polygon(cell.faces[fi].plane, std::move(pos)));
      pos_src.push_back(cell.source_planes[fi]);
    }
  }

  std::sort(cap.begin(), cap.end(), lex_less);
  cap.erase(std::unique(cap.begin(), cap.end()), cap.end());
  if (cap.size() < 3) {
    // Plane grazes the cell within tolerance; keep the bigger side whole.
    const double dn = [&] {
      double m = 0.0;
      for (const auto& v : cell.vertices()) m = std::min(m, plane.signed_distance(v));
      return -m;
    }();
    double dpos = 0.0;
    for (const auto& v : cell.vertices()) dpos = std::max(dpos, plane.signed_distance(v));
    if (dn >= dpos) return {cell, std::nullopt};
    return {std::nullopt, cell};
  }
  ConvexPolygon cap_face = make_polygon(plane, detail::sort_ccw(std::move(cap), plane));
  pos_faces.push_back(cap_face.reversed());
  pos_src.push_back(source);
  neg_faces.push_back(std::move(cap_face));
  neg_src.push_back(source);

  return {ConvexCell(std::move(neg_faces), std::move(neg_src)),
          ConvexCell(std::move(pos_faces), std::move(pos_src))};
}

}  // namespace polyrecon
