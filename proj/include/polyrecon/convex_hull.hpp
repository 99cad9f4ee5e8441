#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "polyrecon/cell.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/plane.hpp"
#include "polyrecon/polygon.hpp"

namespace polyrecon {

namespace detail {

struct HullTriangle {
  std::array<std::size_t, 3> v;
  Vec3 normal;  // unnormalized, outward
  double offset;
  bool alive = true;
};

inline HullTriangle make_hull_triangle(std::span<const Vec3> pts, std::size_t a, std::size_t b, std::size_t c) {
  HullTriangle t;
  t.v = {a, b, c};
  t.normal = cross(pts[b] - pts[a], pts[c] - pts[a]);
  t.offset = dot(t.normal, pts[a]);
  return t;
}

inline double hull_side(const HullTriangle& t, const Vec3& p) {
  return (dot(t.normal, p) - t.offset) / norm(t.normal);
}

}  // namespace detail

/// Convex hull as a watertight cell with coplanar triangles merged into
/// maximal convex faces (angle below `merge_angle`, offset within the
/// point-on-plane tolerance). Faces carry no source plane.
inline ConvexCell convex_hull(std::span<const Vec3> points, double merge_angle = 1e-6) {
  if (points.size() < 4) {
    throw Error(ErrorKind::DegenerateInput, "convex_hull needs at least 4 points");
  }
  const Aabb box = bounding_box(points);
  const double eps = 1e-9 * std::max(box.diagonal(), 1e-300);

  // Initial tetrahedron from extreme points.
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (lex_less(points[i], points[i0])) i0 = i;
  }
  double best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared_distance(points[i], points[i0]);
    if (d > best) { best = d; i1 = i; }
  }
  std::size_t i2 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared_norm(cross(points[i1] - points[i0], points[i] - points[i0]));
    if (d > best) { best = d; i2 = i; }
  }
  if (best <= (eps * eps) * squared_distance(points[i1], points[i0])) {
    throw Error(ErrorKind::DegenerateInput, "convex_hull: points are collinear");
  }
  const Vec3 n012 = normalized(cross(points[i1] - points[i0], points[i2] - points[i0]));
  std::size_t i3 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::abs(dot(n012, points[i] - points[i0]));
    if (d > best) { best = d; i3 = i; }
  }
  if (best <= eps) throw Error(ErrorKind::DegenerateInput, "convex_hull: points are coplanar");

  std::vector<detail::HullTriangle> tris;
  if (dot(n012, points[i3] - points[i0]) > 0.0) std::swap(i1, i2);
  tris.push_back(detail::make_hull_triangle(points, i0, i1, i2));
  tris.push_back(detail::make_hull_triangle(points, i0, i3, i1));
  tris.push_back(detail::make_hull_triangle(points, i1, i3, i2));
  tris.push_back(detail::make_hull_triangle(points, i2, i3, i0));

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_owner;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    if (pi == i0 || pi == i1 || pi == i2 || pi == i3) continue;
    const Vec3& p = points[pi];
    std::vector<std::size_t> visible;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tris[t].alive && detail::hull_side(tris[t], p) > eps) visible.push_back(t);
    }
    if (visible.empty()) continue;
    edge_owner.clear();
    for (std::size_t t : visible) {
      const auto& v = tris[t].v;
      for (int k = 0; k < 3; ++k) edge_owner[{v[k], v[(k + 1) % 3]}] = t;
    }
    std::vector<std::pair<std::size_t, std::size_t>> horizon;
    for (const auto& [e, t] : edge_owner) {
      if (!edge_owner.contains({e.second, e.first})) horizon.push_back(e);
    }
    for (std::size_t t : visible) tris[t].alive = false;
    for (const auto& [a, b] : horizon) tris.push_back(detail::make_hull_triangle(points, a, b, pi));
  }

  // Group triangles by supporting plane.
  struct Group {
    Plane plane;
    double weight;
    std::vector<std::size_t> verts;
  };
  std::vector<Group> groups;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    const double len = norm(t.normal);
    if (len == 0.0) continue;
    const Plane pl(t.normal, t.offset);
    Group* g = nullptr;
    for (auto& cand : groups) {
      if (same_oriented_plane(cand.plane, pl, merge_angle, std::max(eps, 1e-12))) { g = &cand; break; }
    }
    if (!g) {
      groups.push_back({pl, len, {}});
      g = &groups.back();
    } else if (len > g->weight) {
      g->plane = pl;
      g->weight = len;
    }
    g->verts.insert(g->verts.end(), t.v.begin(), t.v.end());
  }

  std::vector<ConvexPolygon> faces;
  for (auto& g : groups) {
    std::sort(g.verts.begin(), g.verts.end());
    g.verts.erase(std::unique(g.verts.begin(), g.verts.end()), g.verts.end());
    const PlaneFrame frame(g.plane);
    std::vector<Vec2> flat;
    flat.reserve(g.verts.size());
    for (std::size_t vi : g.verts) flat.push_back(frame.to_2d(points[vi]));
    const auto hull = convex_hull_2d(flat);
    if (hull.size() < 3) continue;
    std::vector<Vec3> ring;
    ring.reserve(hull.size());
    for (std::size_t h : hull) ring.push_back(points[g.verts[h]]);
    faces.push_back(make_polygon(g.plane, std::move(ring)));
  }
  std::vector<int> src(faces.size(), kNoSource);
  return ConvexCell(std::move(faces), std::move(src));
}

}  // namespace polyrecon
