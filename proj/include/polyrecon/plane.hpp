#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>

#include "polyrecon/error.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

/// Oriented plane {x : normal . x = offset} with unit normal.
struct Plane {
  Vec3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;

  Plane() = default;
  /// Normalizes `n`; `d` is scaled accordingly.
  Plane(const Vec3& n, double d) {
    const double len = norm(n);
    normal = n / len;
    offset = d / len;
  }

  static Plane through(const Vec3& point, const Vec3& n) {
    const Vec3 u = normalized(n);
    Plane p;
    p.normal = u;
    p.offset = dot(u, point);
    return p;
  }

  double signed_distance(const Vec3& p) const { return dot(normal, p) - offset; }
  Vec3 project(const Vec3& p) const { return p - normal * signed_distance(p); }
  Plane flipped() const {
    Plane p;
    p.normal = -normal;
    p.offset = -offset;
    return p;
  }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Angle between normals in radians, in [0, pi].
inline double angle_between(const Plane& a, const Plane& b) {
  return std::atan2(norm(cross(a.normal, b.normal)), dot(a.normal, b.normal));
}

/// Acute angle between the plane directions (normal sign ignored), in [0, pi/2].
inline double acute_angle_between(const Plane& a, const Plane& b) {
  return std::atan2(norm(cross(a.normal, b.normal)), std::abs(dot(a.normal, b.normal)));
}

/// Same oriented plane within an angular and an offset tolerance.
inline bool same_oriented_plane(const Plane& a, const Plane& b, double max_angle, double max_offset) {
  return angle_between(a, b) < max_angle && std::abs(a.offset - b.offset) < max_offset;
}

/// Orthonormal in-plane basis; (u, v, normal) is right-handed, so
/// counter-clockwise in (u, v) is counter-clockwise seen from the normal side.
struct PlaneFrame {
  Vec3 origin;
  Vec3 u, v, normal;

  PlaneFrame() = default;
  explicit PlaneFrame(const Plane& plane) : PlaneFrame(plane, plane.normal * plane.offset) {}
  PlaneFrame(const Plane& plane, const Vec3& origin_on_plane) : origin(origin_on_plane), normal(plane.normal) {
    // Axis least aligned with the normal seeds u.
    const Vec3 n = plane.normal;
    Vec3 seed{1.0, 0.0, 0.0};
    if (std::abs(n.y) < std::abs(n.x) && std::abs(n.y) <= std::abs(n.z)) {
      seed = {0.0, 1.0, 0.0};
    } else if (std::abs(n.z) < std::abs(n.x) && std::abs(n.z) < std::abs(n.y)) {
      seed = {0.0, 0.0, 1.0};
    }
    u = normalized(cross(seed, n));
    v = cross(n, u);
  }

  Vec2 to_2d(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {dot(d, u), dot(d, v)};
  }
  Vec3 to_3d(const Vec2& q) const { return origin + u * q.x + v * q.y; }
};

/// Total-least-squares plane through `points`. The normal sign makes the
/// first point's residual non-negative; an exactly planar first point falls
/// back to making the dominant normal component positive.
inline Plane fit_plane(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw Error(ErrorKind::DegenerateInput, "fit_plane needs at least 3 points, got " +
                                                std::to_string(points.size()));
  }
  Vec3 c;
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
  const double scale = std::max(evals(2), std::numeric_limits<double>::min());
  if (evals(1) <= 1e-12 * scale) {
    throw Error(ErrorKind::DegenerateInput, "fit_plane: points are collinear");
  }
  const Eigen::Vector3d e = solver.eigenvectors().col(0);
  Vec3 n = normalized(Vec3{e(0), e(1), e(2)});
  double d = dot(n, c);

  const double r0 = dot(n, points[0]) - d;
  const double tol = 1e-12 * std::sqrt(scale);
  bool flip = false;
  if (std::abs(r0) > tol) {
    flip = r0 < 0.0;
  } else {
    int k = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(n[i]) > std::abs(n[k])) k = i;
    }
    flip = n[k] < 0.0;
  }
  if (flip) {
    n = -n;
    d = -d;
  }
  Plane plane;
  plane.normal = n;
  plane.offset = d;
  return plane;
}

}  // namespace polyrecon
