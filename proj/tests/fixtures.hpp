#pragma once

// Shared synthetic fixtures for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "polyrecon/cell.hpp"
#include "polyrecon/convex_hull.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/polygon.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon::testing {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm(v);
    if (n > 1e-6) return v / n;
  }
}

inline Vec3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    if (squared_norm(v) <= 1.0) return v * radius;
  }
}

/// Random convex polyhedron: hull of points on a randomly scaled sphere.
inline ConvexCell random_convex_polyhedron(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(6, 30);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  std::uniform_real_distribution<double> c(-5.0, 5.0);
  const Vec3 center{c(rng), c(rng), c(rng)};
  const Vec3 scale{u(rng), u(rng), u(rng)};
  std::vector<Vec3> pts;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const Vec3 d = random_unit(rng);
    pts.push_back(center + Vec3{d.x * scale.x, d.y * scale.y, d.z * scale.z});
  }
  return convex_hull(pts);
}

inline ConvexCell unit_cube() { return make_box({0, 0, 0}, {1, 1, 1}); }

/// Independent volume oracle: divergence theorem over fan triangles about
/// the origin.
inline double signed_volume_oracle(const ConvexCell& cell) {
  double v = 0.0;
  for (const auto& f : cell.faces) {
    const auto& r = f.vertices;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
      const Vec3 a = r[0], b = r[i], c = r[i + 1];
      v += (a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)) / 6.0;
    }
  }
  return v;
}

// ---------------------------------------------------------------- surfaces

/// Uniform area-weighted samples on a set of convex polygons, with isotropic
/// Gaussian noise.
inline std::vector<Vec3> sample_surface(const std::vector<ConvexPolygon>& faces, std::size_t n, double sigma,
                                        std::mt19937_64& rng) {
  struct Tri {
    Vec3 a, b, c;
    double area;
  };
  std::vector<Tri> tris;
  double total = 0.0;
  for (const auto& f : faces) {
    for (std::size_t i = 1; i + 1 < f.vertices.size(); ++i) {
      const Tri t{f.vertices[0], f.vertices[i], f.vertices[i + 1],
                  0.5 * norm(cross(f.vertices[i] - f.vertices[0], f.vertices[i + 1] - f.vertices[0]))};
      total += t.area;
      tris.push_back(t);
    }
  }
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& t : tris) cdf.push_back(acc += t.area / total);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u(rng));
    const Tri& t = tris[std::min<std::size_t>(it - cdf.begin(), tris.size() - 1)];
    double r1 = u(rng), r2 = u(rng);
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    Vec3 p = t.a + (t.b - t.a) * r1 + (t.c - t.a) * r2;
    if (sigma > 0.0) p += Vec3{g(rng), g(rng), g(rng)} * sigma;
    pts.push_back(p);
  }
  return pts;
}

inline ConvexPolygon quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  ConvexPolygon p;
  p.vertices = {a, b, c, d};
  p.plane = Plane::through(a, ring_area_vector(p.vertices));
  return p;
}

inline std::vector<ConvexPolygon> box_faces(const Vec3& lo, const Vec3& hi) { return make_box(lo, hi).faces; }

/// [0,2]x[0,2]x[0,1] with the [1,2]x[1,2] column removed.
inline std::vector<ConvexPolygon> l_shape_faces() {
  std::vector<ConvexPolygon> f;
  for (double z : {0.0, 1.0}) {
    f.push_back(quad({0, 0, z}, {1, 0, z}, {1, 2, z}, {0, 2, z}));
    f.push_back(quad({1, 0, z}, {2, 0, z}, {2, 1, z}, {1, 1, z}));
  }
  f.push_back(quad({0, 0, 0}, {2, 0, 0}, {2, 0, 1}, {0, 0, 1}));  // y = 0
  f.push_back(quad({0, 2, 0}, {1, 2, 0}, {1, 2, 1}, {0, 2, 1}));  // y = 2
  f.push_back(quad({0, 0, 0}, {0, 2, 0}, {0, 2, 1}, {0, 0, 1}));  // x = 0
  f.push_back(quad({2, 0, 0}, {2, 1, 0}, {2, 1, 1}, {2, 0, 1}));  // x = 2
  f.push_back(quad({1, 1, 0}, {2, 1, 0}, {2, 1, 1}, {1, 1, 1}));  // notch y = 1
  f.push_back(quad({1, 1, 0}, {1, 2, 0}, {1, 2, 1}, {1, 1, 1}));  // notch x = 1
  return f;
}

/// Cube [0,3]^3 with a closed cubic void [1,2]^3 inside.
inline std::vector<ConvexPolygon> hollow_box_faces() {
  auto f = box_faces({0, 0, 0}, {3, 3, 3});
  for (const auto& g : box_faces({1, 1, 1}, {2, 2, 2})) f.push_back(g.reversed());
  return f;
}

/// Gable-roofed house, 10 x 6 footprint, eaves at 4, ridge at 6 along x.
inline std::vector<ConvexPolygon> house_faces() {
  std::vector<ConvexPolygon> f;
  f.push_back(quad({0, 0, 0}, {0, 6, 0}, {10, 6, 0}, {10, 0, 0}));     // floor
  f.push_back(quad({0, 0, 0}, {10, 0, 0}, {10, 0, 4}, {0, 0, 4}));     // y = 0
  f.push_back(quad({10, 6, 0}, {0, 6, 0}, {0, 6, 4}, {10, 6, 4}));     // y = 6
  f.push_back(quad({0, 0, 4}, {10, 0, 4}, {10, 3, 6}, {0, 3, 6}));     // roof south
  f.push_back(quad({10, 6, 4}, {0, 6, 4}, {0, 3, 6}, {10, 3, 6}));     // roof north
  for (double x : {0.0, 10.0}) {
    ConvexPolygon g;
    g.vertices = {{x, 0, 0}, {x, 6, 0}, {x, 6, 4}, {x, 3, 6}, {x, 0, 4}};
    if (x == 10.0) std::reverse(g.vertices.begin(), g.vertices.end());
    g.plane = Plane::through(g.vertices[0], ring_area_vector(g.vertices));
    f.push_back(g);
  }
  return f;
}

inline std::vector<Vec3> uniform_in_box(const Aabb& box, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({box.lo.x + u(rng) * (box.hi.x - box.lo.x), box.lo.y + u(rng) * (box.hi.y - box.lo.y),
                   box.lo.z + u(rng) * (box.hi.z - box.lo.z)});
  }
  return pts;
}

/// Cell-centred n x n grid on each face of the unit cube; face id per point.
inline std::vector<Vec3> cube_face_grid(int n, std::vector<int>* face_of = nullptr) {
  std::vector<Vec3> pts;
  for (int f = 0; f < 6; ++f) {
    const int axis = f / 2;
    const double level = f % 2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Vec3 p;
        p[axis] = level;
        p[(axis + 1) % 3] = (i + 0.5) / n;
        p[(axis + 2) % 3] = (j + 0.5) / n;
        pts.push_back(p);
        if (face_of) face_of->push_back(f);
      }
  }
  return pts;
}

/// Detected-plane stand-in whose footprint is exactly the convex polygon:
/// a grid over it plus its vertices, with an alpha that keeps the whole hull.
inline DetectedPlane polygon_plane(const ConvexPolygon& poly, int n = 8) {
  DetectedPlane dp;
  dp.plane = poly.plane;
  const PlaneFrame frame(poly.plane);
  std::vector<Vec2> ring;
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& v : poly.vertices) {
    ring.push_back(frame.to_2d(v));
    lo = {std::min(lo.x, ring.back().x), std::min(lo.y, ring.back().y)};
    hi = {std::max(hi.x, ring.back().x), std::max(hi.y, ring.back().y)};
  }
  std::vector<Vec3> pts = poly.vertices;
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const Vec2 q{lo.x + (hi.x - lo.x) * i / n, lo.y + (hi.y - lo.y) * j / n};
      if (inside_convex_2d(ring, q, -1e-9)) pts.push_back(frame.to_3d(q));
    }
  dp.footprint = make_footprint(dp.plane, pts, 1e12);
  return dp;
}

/// Rectangle o, o+u, o+u+v, o+v as a detected plane.
inline DetectedPlane rect_plane(const Vec3& o, const Vec3& u, const Vec3& v, int n = 8) {
  return polygon_plane(quad(o, o + u, o + u + v, o + v), n);
}

/// Grid with spacing h over a convex polygon, boundary included.
inline std::vector<Vec3> face_grid(const ConvexPolygon& poly, double h) {
  const PlaneFrame frame(poly.plane, poly.vertices[0]);
  std::vector<Vec2> ring;
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& v : poly.vertices) {
    ring.push_back(frame.to_2d(v));
    lo = {std::min(lo.x, ring.back().x), std::min(lo.y, ring.back().y)};
    hi = {std::max(hi.x, ring.back().x), std::max(hi.y, ring.back().y)};
  }
  std::vector<Vec3> pts;
  const int nx = static_cast<int>(std::floor((hi.x - lo.x) / h + 1e-9));
  const int ny = static_cast<int>(std::floor((hi.y - lo.y) / h + 1e-9));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) {
      const Vec2 q{lo.x + i * h, lo.y + j * h};
      if (inside_convex_2d(ring, q, 1e-9)) pts.push_back(frame.to_3d(q));
    }
  return pts;
}

/// Exact planes of a polyhedral surface, coplanar faces grouped, each with
/// the alpha-shape footprint of its face grids; `cloud` receives the grids.
inline std::vector<DetectedPlane> planes_from_faces(const std::vector<ConvexPolygon>& faces, double h,
                                                    std::vector<Vec3>& cloud) {
  std::vector<DetectedPlane> out;
  std::vector<std::vector<Vec3>> members;
  for (const auto& f : faces) {
    const auto pts = face_grid(f, h);
    std::size_t k = 0;
    for (; k < out.size(); ++k) {
      if (dot(out[k].plane.normal, f.plane.normal) > 1.0 - 1e-12 &&
          std::abs(out[k].plane.offset - f.plane.offset) < 1e-12)
        break;
    }
    if (k == out.size()) {
      out.push_back({});
      out.back().plane = f.plane;
      members.emplace_back();
    }
    members[k].insert(members[k].end(), pts.begin(), pts.end());
    cloud.insert(cloud.end(), pts.begin(), pts.end());
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& m = members[k];
    std::sort(m.begin(), m.end(), lex_less);
    m.erase(std::unique(m.begin(), m.end()), m.end());
    out[k].footprint = make_footprint(out[k].plane, m, 4.0 * h * h);
  }
  return out;
}

}  // namespace polyrecon::testing
