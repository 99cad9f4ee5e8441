#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "polyrecon/delaunay.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/polygon.hpp"
#include "polyrecon/predicates.hpp"

namespace polyrecon {

/// Squared circumradius of a 2D triangle; infinite for degenerate triangles.
inline double circumradius_squared(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double ab = dot(b - a, b - a), bc = dot(c - b, c - b), ca = dot(a - c, a - c);
  const double area2 = cross(b - a, c - a);
  if (area2 == 0.0) return std::numeric_limits<double>::infinity();
  return ab * bc * ca / (4.0 * area2 * area2);
}

/// Alpha-complex of a planar point set: the Delaunay triangles whose squared
/// circumradius is at most `alpha`.
struct AlphaShape2D {
  double alpha = 0.0;
  double area = 0.0;
  /// Retained triangles, counter-clockwise, indexing the input points.
  std::vector<std::array<std::size_t, 3>> triangles;
  /// Closed boundary loops (interior on the left), as point indices.
  std::vector<std::vector<std::size_t>> boundary_loops;

  /// Input point indices lying on some boundary loop, ascending.
  std::vector<std::size_t> boundary_vertices() const {
    std::vector<std::size_t> out;
    for (const auto& loop : boundary_loops) out.insert(out.end(), loop.begin(), loop.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<std::vector<Vec2>> boundary_polylines(std::span<const Vec2> points) const {
    std::vector<std::vector<Vec2>> out;
    for (const auto& loop : boundary_loops) {
      std::vector<Vec2> line;
      line.reserve(loop.size());
      for (std::size_t i : loop) line.push_back(points[i]);
      out.push_back(std::move(line));
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> chain_boundary(
    const std::vector<std::array<std::size_t, 3>>& triangles) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(triangles.size() * 3);
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) edges.emplace_back(t[k], t[(k + 1) % 3]);
  }
  std::sort(edges.begin(), edges.end());
  std::vector<std::pair<std::size_t, std::size_t>> boundary;
  for (const auto& e : edges) {
    if (!std::binary_search(edges.begin(), edges.end(), std::make_pair(e.second, e.first))) {
      boundary.push_back(e);
    }
  }
  std::vector<bool> used(boundary.size(), false);
  std::vector<std::vector<std::size_t>> loops;
  for (std::size_t s = 0; s < boundary.size(); ++s) {
    if (used[s]) continue;
    std::vector<std::size_t> loop;
    std::size_t cur = s;
    while (!used[cur]) {
      used[cur] = true;
      loop.push_back(boundary[cur].first);
      const std::size_t next_v = boundary[cur].second;
      auto it = std::lower_bound(boundary.begin(), boundary.end(), std::make_pair(next_v, std::size_t{0}));
      std::size_t nxt = cur;
      for (; it != boundary.end() && it->first == next_v; ++it) {
        const auto k = static_cast<std::size_t>(it - boundary.begin());
        if (!used[k]) { nxt = k; break; }
      }
      if (nxt == cur) break;
      cur = nxt;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace detail

/// Builds the alpha-complex from a precomputed Delaunay triangulation.
inline AlphaShape2D alpha_shape_from_triangulation(std::span<const Vec2> points, const Triangulation2D& dt,
                                                   double alpha) {
  AlphaShape2D shape;
  shape.alpha = alpha;
  CompensatedSum area;
  for (const auto& t : dt.triangles) {
    if (circumradius_squared(points[t[0]], points[t[1]], points[t[2]]) <= alpha) {
      shape.triangles.push_back(t);
      area.add(0.5 * cross(points[t[1]] - points[t[0]], points[t[2]] - points[t[0]]));
    }
  }
  shape.area = std::max(0.0, area.value());
  shape.boundary_loops = detail::chain_boundary(shape.triangles);
  return shape;
}

/// Alpha shape of `points` (alpha is a squared radius). Throws DegenerateInput
/// for fewer than 3 points, non-positive alpha, or collinear input.
inline AlphaShape2D alpha_shape_2d(std::span<const Vec2> points, double alpha) {
  if (points.size() < 3) throw Error(ErrorKind::DegenerateInput, "alpha_shape_2d needs at least 3 points");
  if (!(alpha > 0.0)) throw Error(ErrorKind::DegenerateInput, "alpha_shape_2d needs alpha > 0");
  const auto dt = delaunay_triangulation(points);
  if (dt.triangles.empty()) throw Error(ErrorKind::DegenerateInput, "alpha_shape_2d: points are collinear");
  return alpha_shape_from_triangulation(points, dt, alpha);
}

}  // namespace polyrecon
