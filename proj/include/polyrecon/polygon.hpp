#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polyrecon/plane.hpp"
#include "polyrecon/predicates.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

/// Twice the vector area of a closed ring (Newell); its direction is the
/// ring normal for a counter-clockwise ring.
inline Vec3 ring_area_vector(std::span<const Vec3> ring) {
  Vec3 s;
  const std::size_t n = ring.size();
  if (n < 3) return s;
  // Relative to the first vertex to limit cancellation.
  const Vec3 o = ring[0];
  for (std::size_t i = 1; i + 1 < n; ++i) s += cross(ring[i] - o, ring[i + 1] - o);
  return s;
}

/// Planar convex polygon; vertices counter-clockwise seen from `plane.normal`.
struct ConvexPolygon {
  Plane plane;
  std::vector<Vec3> vertices;

  double area() const { return 0.5 * dot(ring_area_vector(vertices), plane.normal); }

  Vec3 centroid() const {
    const std::size_t n = vertices.size();
    if (n == 0) return {};
    if (n < 3) {
      Vec3 c;
      for (const auto& v : vertices) c += v;
      return c / static_cast<double>(n);
    }
    Vec3 acc;
    double total = 0.0;
    const Vec3 o = vertices[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double a = dot(cross(vertices[i] - o, vertices[i + 1] - o), plane.normal);
      acc += (o + vertices[i] + vertices[i + 1]) * (a / 3.0);
      total += a;
    }
    if (total == 0.0) {
      Vec3 c;
      for (const auto& v : vertices) c += v;
      return c / static_cast<double>(n);
    }
    return acc / total;
  }

  ConvexPolygon reversed() const {
    ConvexPolygon r;
    r.plane = plane.flipped();
    r.vertices.assign(vertices.rbegin(), vertices.rend());
    return r;
  }
};

/// Andrew's monotone chain; returns hull indices counter-clockwise, collinear
/// boundary points dropped.
inline std::vector<std::size_t> convex_hull_2d(std::span<const Vec2> pts) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
    if (pts[a].y != pts[b].y) return pts[a].y < pts[b].y;
    return a < b;
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; }),
            idx.end());
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && predicates::orient2d(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0) --k;
    hull[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (std::size_t j = idx.size() - 1; j-- > 0;) {
    const std::size_t i = idx[j];
    while (k >= lower && predicates::orient2d(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area_2d(std::span<const Vec2> ring) {
  double a = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

/// Clip a 2D convex ring against the half-plane left of (a -> b), i.e.
/// cross(b - a, p - a) >= 0.
inline std::vector<Vec2> clip_left_of(std::span<const Vec2> ring, const Vec2& a, const Vec2& b) {
  std::vector<Vec2> out;
  const std::size_t n = ring.size();
  if (n == 0) return out;
  const Vec2 e = b - a;
  auto side = [&](const Vec2& p) { return cross(e, p - a); };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % n];
    const double sp = side(p), sq = side(q);
    if (sp >= 0.0) out.push_back(p);
    if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + (q - p) * t);
    }
  }
  return out;
}

/// Intersection of two counter-clockwise convex rings.
inline std::vector<Vec2> intersect_convex_2d(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  std::vector<Vec2> out(subject.begin(), subject.end());
  const std::size_t n = clip.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) out = clip_left_of(out, clip[i], clip[(i + 1) % n]);
  return out;
}

/// Point inside a counter-clockwise convex ring, allowing `tol` outside each edge.
inline bool inside_convex_2d(std::span<const Vec2> ring, const Vec2& p, double tol = 0.0) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -tol) return false;
  }
  return true;
}

/// Crossing-number point-in-polygon for a simple ring of any orientation.
inline bool inside_ring_2d(std::span<const Vec2> ring, const Vec2& p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[i], b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

/// Point of segment [a, b] where the plane crosses it; endpoints are put in a
/// canonical order first so a shared edge gives bitwise-identical results
/// regardless of traversal direction.
inline Vec3 edge_plane_crossing(const Vec3& a, double da, const Vec3& b, double db) {
  if (lex_less(b, a)) return edge_plane_crossing(b, db, a, da);
  const double t = da / (da - db);
  return a + (b - a) * t;
}

/// Clips a convex 3D polygon ring by an (unsnapped) half-space
/// `plane.signed_distance(p) <= 0`.
inline std::vector<Vec3> clip_ring_below(std::span<const Vec3> ring, const Plane& plane) {
  std::vector<Vec3> out;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = ring[i];
    const Vec3& q = ring[(i + 1) % n];
    const double dp = plane.signed_distance(p), dq = plane.signed_distance(q);
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(edge_plane_crossing(p, dp, q, dq));
  }
  return out;
}

inline double point_segment_squared_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = squared_norm(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return squared_distance(p, a + ab * t);
}

/// Euclidean distance from `p` to a planar simple polygon (any convexity).
/// `normal` is the polygon's unit normal.
inline double point_ring_distance(const Vec3& p, std::span<const Vec3> ring, const Vec3& normal) {
  const std::size_t n = ring.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n >= 3) {
    Plane plane;
    plane.normal = normal;
    plane.offset = dot(normal, ring[0]);
    const PlaneFrame frame(plane, ring[0]);
    std::vector<Vec2> flat;
    flat.reserve(n);
    for (const auto& v : ring) flat.push_back(frame.to_2d(v));
    if (inside_ring_2d(flat, frame.to_2d(p))) return std::abs(plane.signed_distance(p));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_squared_distance(p, ring[i], ring[(i + 1) % n]));
  }
  return std::sqrt(best);
}

}  // namespace polyrecon
