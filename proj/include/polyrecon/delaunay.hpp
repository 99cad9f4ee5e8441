#pragma once

// Incremental Delaunay triangulation (Bowyer-Watson with walking point
// location) on exact predicates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "polyrecon/predicates.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

struct Triangulation2D {
  /// Counter-clockwise triangles indexing the input point span.
  std::vector<std::array<std::size_t, 3>> triangles;
};

namespace detail {

inline std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int order) {
  const std::uint32_t n = 1u << order;
  std::uint64_t d = 0;
  for (std::uint32_t s = n >> 1; s > 0; s >>= 1) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

class DelaunayBuilder {
 public:
  explicit DelaunayBuilder(std::span<const Vec2> input) : input_(input) {}

  Triangulation2D run() {
    Triangulation2D out;
    const std::size_t n = input_.size();
    if (n < 3) return out;

    // Unique points in Hilbert order; duplicates map onto their first copy.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (input_[a].x != input_[b].x) return input_[a].x < input_[b].x;
      if (input_[a].y != input_[b].y) return input_[a].y < input_[b].y;
      return a < b;
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t a, std::size_t b) { return input_[a] == input_[b]; }),
                order.end());
    if (order.size() < 3) return out;
    bool collinear = true;
    for (std::size_t k = 2; k < order.size() && collinear; ++k) {
      collinear = predicates::orient2d(input_[order[0]], input_[order[1]], input_[order[k]]) == 0;
    }
    if (collinear) return out;

    double minx = input_[order[0]].x, maxx = minx, miny = input_[order[0]].y, maxy = miny;
    for (std::size_t i : order) {
      minx = std::min(minx, input_[i].x);
      maxx = std::max(maxx, input_[i].x);
      miny = std::min(miny, input_[i].y);
      maxy = std::max(maxy, input_[i].y);
    }
    const double span = std::max({maxx - minx, maxy - miny, 1e-300});
    {
      constexpr int kOrder = 16;
      const double scale = static_cast<double>((1u << kOrder) - 1) / span;
      std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
      keyed.reserve(order.size());
      for (std::size_t i : order) {
        const auto qx = static_cast<std::uint32_t>((input_[i].x - minx) * scale);
        const auto qy = static_cast<std::uint32_t>((input_[i].y - miny) * scale);
        keyed.emplace_back(hilbert_index(qx, qy, kOrder), i);
      }
      std::sort(keyed.begin(), keyed.end());
      for (std::size_t k = 0; k < keyed.size(); ++k) order[k] = keyed[k].second;
    }

    // Super triangle vertices are stored after the input points.
    const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
    const double big = 1e3 * span;
    pts_.assign(input_.begin(), input_.end());
    super0_ = pts_.size();
    pts_.push_back({cx - big, cy - big});
    pts_.push_back({cx + big, cy - big});
    pts_.push_back({cx, cy + big});
    tris_.push_back({{super0_, super0_ + 1, super0_ + 2}, {kNone, kNone, kNone}, true});
    last_ = 0;

    for (std::size_t i : order) insert(i);

    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= super0_ || t.v[1] >= super0_ || t.v[2] >= super0_) continue;
      out.triangles.push_back(t.v);
    }
    fill_hull_pockets(out);
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Tri {
    std::array<std::size_t, 3> v;
    std::array<std::size_t, 3> nbr;  // across edge opposite v[i]
    bool alive;
  };

  std::size_t locate(const Vec2& p) {
    std::size_t t = last_;
    std::size_t steps = 0;
    for (;;) {
      const Tri& tri = tris_[t];
      bool moved = false;
      // Rotate the starting edge to avoid cycling on degenerate walks.
      const std::size_t start = steps % 3;
      for (std::size_t kk = 0; kk < 3; ++kk) {
        const std::size_t k = (start + kk) % 3;
        const Vec2& a = pts_[tri.v[(k + 1) % 3]];
        const Vec2& b = pts_[tri.v[(k + 2) % 3]];
        if (predicates::orient2d(a, b, p) < 0 && tri.nbr[k] != kNone) {
          t = tri.nbr[k];
          moved = true;
          break;
        }
      }
      ++steps;
      if (!moved) return t;
    }
  }

  void insert(std::size_t pi) {
    const Vec2& p = pts_[pi];
    const std::size_t start = locate(p);

    std::vector<std::size_t> cavity{start};
    std::vector<std::size_t> stack{start};
    mark_.resize(tris_.size(), 0);
    ++epoch_;
    mark_[start] = epoch_;
    while (!stack.empty()) {
      const std::size_t t = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const std::size_t nb = tris_[t].nbr[k];
        if (nb == kNone || mark_[nb] == epoch_) continue;
        const Tri& o = tris_[nb];
        if (predicates::incircle(pts_[o.v[0]], pts_[o.v[1]], pts_[o.v[2]], p) > 0) {
          mark_[nb] = epoch_;
          cavity.push_back(nb);
          stack.push_back(nb);
        }
      }
    }

    struct Boundary {
      std::size_t a, b, outside;
    };
    std::vector<Boundary> boundary;
    for (std::size_t t : cavity) {
      const Tri& tri = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const std::size_t nb = tri.nbr[k];
        if (nb != kNone && mark_[nb] == epoch_) continue;
        boundary.push_back({tri.v[(k + 1) % 3], tri.v[(k + 2) % 3], nb});
      }
    }
    for (std::size_t t : cavity) tris_[t].alive = false;

    // New fan (a, b, p); link to outside and to neighbouring fan triangles.
    std::vector<std::pair<std::size_t, std::size_t>> by_start, by_end;
    by_start.reserve(boundary.size());
    by_end.reserve(boundary.size());
    std::vector<std::size_t> created;
    created.reserve(boundary.size());
    for (const auto& e : boundary) {
      std::size_t id;
      if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
      } else {
        id = tris_.size();
        tris_.push_back({});
      }
      tris_[id] = {{e.a, e.b, pi}, {kNone, kNone, e.outside}, true};
      if (e.outside != kNone) {
        Tri& o = tris_[e.outside];
        for (int k = 0; k < 3; ++k) {
          if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nbr[k] = id;
        }
      }
      by_start.emplace_back(e.a, id);
      by_end.emplace_back(e.b, id);
      created.push_back(id);
    }
    std::sort(by_start.begin(), by_start.end());
    std::sort(by_end.begin(), by_end.end());
    auto find = [](const std::vector<std::pair<std::size_t, std::size_t>>& v, std::size_t key) {
      auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(key, std::size_t{0}));
      return it != v.end() && it->first == key ? it->second : kNone;
    };
    for (std::size_t id : created) {
      Tri& t = tris_[id];
      // Edge (b, p) is opposite a: neighbour starts at b.
      t.nbr[0] = find(by_start, t.v[1]);
      // Edge (p, a) is opposite b: neighbour ends at a.
      t.nbr[1] = find(by_end, t.v[0]);
    }
    for (std::size_t t : cavity) free_.push_back(t);
    last_ = created.front();
    mark_.resize(tris_.size(), 0);
  }

  // Triangles that needed a super vertex can leave concave notches along the
  // convex hull; close them so the union equals the hull.
  void fill_hull_pockets(Triangulation2D& out) const {
    for (int guard = 0; guard < 1 << 20; ++guard) {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (const auto& t : out.triangles) {
        for (int k = 0; k < 3; ++k) edges.emplace_back(t[k], t[(k + 1) % 3]);
      }
      std::sort(edges.begin(), edges.end());
      std::vector<std::pair<std::size_t, std::size_t>> next;  // boundary a -> b
      for (const auto& e : edges) {
        if (!std::binary_search(edges.begin(), edges.end(), std::make_pair(e.second, e.first))) next.push_back(e);
      }
      std::sort(next.begin(), next.end());
      bool added = false;
      for (const auto& [a, b] : next) {
        auto it = std::lower_bound(next.begin(), next.end(), std::make_pair(b, std::size_t{0}));
        if (it == next.end() || it->first != b) continue;
        if (std::next(it) != next.end() && std::next(it)->first == b) continue;  // pinch vertex
        const std::size_t c = it->second;
        if (c == a) continue;
        // Boundary runs counter-clockwise around the region; a clockwise turn is a notch.
        if (predicates::orient2d(pts_[a], pts_[b], pts_[c]) < 0) {
          bool empty = true;
          for (std::size_t q = 0; q < super0_ && empty; ++q) {
            if (q == a || q == b || q == c) continue;
            if (predicates::orient2d(pts_[a], pts_[c], pts_[q]) > 0 &&
                predicates::orient2d(pts_[c], pts_[b], pts_[q]) > 0 &&
                predicates::orient2d(pts_[b], pts_[a], pts_[q]) > 0) {
              empty = false;
            }
          }
          if (!empty) continue;
          out.triangles.push_back({a, c, b});
          added = true;
          break;
        }
      }
      if (!added) return;
    }
  }

  std::span<const Vec2> input_;
  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<std::size_t> free_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  std::size_t super0_ = 0;
  std::size_t last_ = 0;
};

}  // namespace detail

/// Delaunay triangulation of `points`. Exact duplicates are triangulated once
/// (triangles reference the first copy). Collinear or fewer than three unique
/// points yield no triangles.
inline Triangulation2D delaunay_triangulation(std::span<const Vec2> points) {
  return detail::DelaunayBuilder(points).run();
}

}  // namespace polyrecon
