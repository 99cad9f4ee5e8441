#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "polyrecon/error.hpp"
#include "polyrecon/polygon.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

/// A face reduced to what the monopole winding sum needs.
struct OrientedFace {
  Vec3 center;
  double area = 0.0;
  Vec3 normal;  // unit
};

inline OrientedFace to_oriented_face(const ConvexPolygon& poly) {
  return {poly.centroid(), poly.area(), poly.plane.normal};
}

/// Face-center approximation of the winding number:
///   w(q) = sum_i a_i (p_i - q) . n_i / (4 pi |p_i - q|^3),
/// summed in face order. Throws SingularEvaluation when q is within
/// `eps_dist` of a face center.
inline double winding_number_approx(const Vec3& q, std::span<const OrientedFace> faces, double eps_dist = 1e-12) {
  double w = 0.0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Vec3 d = faces[i].center - q;
    const double r = norm(d);
    if (r <= eps_dist) {
      throw Error(ErrorKind::SingularEvaluation,
                  "query point coincides with the center of face " + std::to_string(i));
    }
    w += faces[i].area * dot(d, faces[i].normal) / (4.0 * std::numbers::pi * r * r * r);
  }
  return w;
}

/// Signed solid angle of triangle (a, b, c) seen from q (Van Oosterom and
/// Strackee); positive when the triangle faces away from q.
inline double solid_angle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 x = a - q, y = b - q, z = c - q;
  const double lx = norm(x), ly = norm(y), lz = norm(z);
  const double num = dot(x, cross(y, z));
  const double den = lx * ly * lz + dot(x, y) * lz + dot(x, z) * ly + dot(y, z) * lx;
  return 2.0 * std::atan2(num, den);
}

/// Solid angle of a planar ring (fan from its first vertex). Signed fan
/// triangles make this valid for non-convex simple rings as well.
inline double ring_solid_angle(const Vec3& q, std::span<const Vec3> ring) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) s += solid_angle(q, ring[0], ring[i], ring[i + 1]);
  return s;
}

/// Exact winding number: total signed solid angle over 4 pi. Throws
/// SingularEvaluation when q lies within `eps_dist` of a face.
inline double winding_number_exact(const Vec3& q, std::span<const ConvexPolygon> faces, double eps_dist = 1e-12) {
  double s = 0.0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& f = faces[i];
    if (point_ring_distance(q, f.vertices, f.plane.normal) <= eps_dist) {
      throw Error(ErrorKind::SingularEvaluation, "query point lies on face " + std::to_string(i));
    }
    s += ring_solid_angle(q, f.vertices);
  }
  return s / (4.0 * std::numbers::pi);
}

}  // namespace polyrecon
