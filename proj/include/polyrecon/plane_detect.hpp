#pragma once

// Normal-free multi-plane detection: seeded greedy RANSAC with localized
// sampling, a nearest-plane polish, and the plane refinement merge rule.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "polyrecon/alpha_shape.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/kdtree.hpp"
#include "polyrecon/plane.hpp"
#include "polyrecon/point_cloud.hpp"

namespace polyrecon {

/// Detection parameters. Zero means "derive from the cloud" for epsilon,
/// min_support and alpha.
struct DetectionParams {
  double epsilon = 0.0;          // inlier distance; auto = 2 x spacing
  std::size_t min_support = 0;   // auto = max(50, 0.1% of points)
  double theta_deg = 10.0;       // merge angle
  double merge_divisor = 5.0;    // shared-point threshold divisor
  double w_fidelity = 1.0;
  double w_simplicity = 1.0;
  double w_completeness = 1.0;
  std::uint64_t seed = 1;
  std::size_t proposals = 200;   // RANSAC samples per extracted plane
  std::size_t sample_neighbors = 24;
  std::size_t polish_rounds = 3;
  double alpha = 0.0;            // footprint alpha (squared radius); auto = (4 x spacing)^2
};

/// Resolves the automatic parameters against a cloud and validates domains.
inline DetectionParams resolve(DetectionParams p, const PointCloud& cloud) {
  const double s = cloud.avg_spacing > 0.0 ? cloud.avg_spacing : 1e-3 * std::max(cloud.bbox.diagonal(), 1e-300);
  if (p.epsilon == 0.0) p.epsilon = 2.0 * s;
  if (p.min_support == 0) {
    p.min_support = std::max<std::size_t>(50, static_cast<std::size_t>(std::ceil(0.001 * cloud.size())));
  }
  if (p.alpha == 0.0) p.alpha = (4.0 * s) * (4.0 * s);
  if (!(p.epsilon > 0.0)) throw Error(ErrorKind::ConfigError, "epsilon must be positive");
  if (p.min_support < 3) throw Error(ErrorKind::ConfigError, "min_support must be at least 3");
  if (!(p.theta_deg > 0.0 && p.theta_deg < 90.0)) throw Error(ErrorKind::ConfigError, "theta must be in (0, 90) degrees");
  if (!(p.merge_divisor >= 1.0)) throw Error(ErrorKind::ConfigError, "merge_divisor must be at least 1");
  if (!(p.alpha > 0.0)) throw Error(ErrorKind::ConfigError, "alpha must be positive");
  if (p.proposals == 0) throw Error(ErrorKind::ConfigError, "proposals must be positive");
  return p;
}

/// Alpha-shape footprint of a plane's inliers, lifted back to 3D.
struct Footprint {
  AlphaShape2D shape;
  std::vector<Vec3> projected;  // inliers projected onto the plane, inlier order

  double area() const { return shape.area; }

  std::vector<std::array<Vec3, 3>> triangles() const {
    std::vector<std::array<Vec3, 3>> out;
    out.reserve(shape.triangles.size());
    for (const auto& t : shape.triangles) out.push_back({projected[t[0]], projected[t[1]], projected[t[2]]});
    return out;
  }

  std::vector<Vec3> boundary_points() const {
    std::vector<Vec3> out;
    for (auto i : shape.boundary_vertices()) out.push_back(projected[i]);
    return out;
  }
};

inline Footprint make_footprint(const Plane& plane, std::span<const Vec3> points, double alpha) {
  Footprint f;
  const PlaneFrame frame(plane);
  std::vector<Vec2> flat;
  flat.reserve(points.size());
  f.projected.reserve(points.size());
  for (const auto& p : points) {
    const Vec2 q = frame.to_2d(p);
    flat.push_back(q);
    f.projected.push_back(frame.to_3d(q));
  }
  f.shape.alpha = alpha;
  if (points.size() >= 3) {
    const auto dt = delaunay_triangulation(flat);
    if (!dt.triangles.empty()) f.shape = alpha_shape_from_triangulation(flat, dt, alpha);
  }
  return f;
}

struct DetectedPlane {
  Plane plane;
  std::vector<std::uint32_t> inliers;  // ascending indices into the cloud
  Footprint footprint;
  double score = 0.0;
};

namespace detail {

inline std::vector<Vec3> gather(const PointCloud& cloud, std::span<const std::uint32_t> idx) {
  std::vector<Vec3> pts;
  pts.reserve(idx.size());
  for (auto i : idx) pts.push_back(cloud.points[i]);
  return pts;
}

inline double plane_score(const DetectionParams& p, double mean_dist, std::size_t count, std::size_t remaining) {
  return p.w_fidelity * (1.0 - mean_dist / p.epsilon) +
         p.w_completeness * static_cast<double>(count) / static_cast<double>(std::max<std::size_t>(remaining, 1)) -
         p.w_simplicity / static_cast<double>(std::max<std::size_t>(count, 1));
}

/// Least-squares fit, then one refit on the points within three robust
/// standard deviations (1.4826 x median absolute residual). Stray points
/// inside the epsilon band would otherwise tilt the plane.
inline Plane robust_fit(const PointCloud& cloud, std::span<const std::uint32_t> idx, const Plane& fallback) {
  Plane p = fallback;
  try {
    p = fit_plane(gather(cloud, idx));
  } catch (const Error&) {
    return fallback;
  }
  std::vector<double> r;
  r.reserve(idx.size());
  for (auto i : idx) r.push_back(std::abs(p.signed_distance(cloud.points[i])));
  auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  const double cut = 3.0 * 1.4826 * *mid;
  if (!(cut > 0.0)) return p;
  std::vector<Vec3> kept;
  for (auto i : idx)
    if (std::abs(p.signed_distance(cloud.points[i])) <= cut) kept.push_back(cloud.points[i]);
  if (kept.size() < 3 || kept.size() == idx.size()) return p;
  try {
    return fit_plane(kept);
  } catch (const Error&) {
    return p;
  }
}

}  // namespace detail

/// Recomputes the footprint of a plane from its inliers.
inline void update_footprint(DetectedPlane& dp, const PointCloud& cloud, double alpha) {
  const auto pts = detail::gather(cloud, dp.inliers);
  dp.footprint = make_footprint(dp.plane, pts, alpha);
}

/// Greedy multi-plane extraction. `params` must already be resolved.
inline std::vector<DetectedPlane> detect_planes(const PointCloud& cloud, const DetectionParams& params) {
  const std::size_t n = cloud.size();
  if (n < params.min_support) throw Error(ErrorKind::NoPlanesFound, "cloud smaller than min_support");
  const KdTree tree(cloud.points);
  std::mt19937_64 rng(params.seed);
  std::vector<int> owner(n, -1);
  std::vector<Plane> planes;
  const double eps = params.epsilon;

  for (;;) {
    std::vector<std::uint32_t> remaining;
    for (std::uint32_t i = 0; i < n; ++i)
      if (owner[i] < 0) remaining.push_back(i);
    if (remaining.size() < params.min_support) break;

    std::optional<Plane> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < params.proposals; ++t) {
      const std::uint32_t i0 = remaining[rng() % remaining.size()];
      std::vector<std::uint32_t> local;
      for (auto j : tree.knn(cloud.points[i0], params.sample_neighbors, i0))
        if (owner[j] < 0) local.push_back(j);
      std::uint32_t i1, i2;
      if (local.size() >= 2) {
        i1 = local[rng() % local.size()];
        i2 = local[rng() % local.size()];
      } else {
        i1 = remaining[rng() % remaining.size()];
        i2 = remaining[rng() % remaining.size()];
      }
      const Vec3 a = cloud.points[i0], b = cloud.points[i1], c = cloud.points[i2];
      const Vec3 nrm = cross(b - a, c - a);
      if (norm(nrm) <= 1e-12 * std::max(squared_norm(b - a), squared_norm(c - a))) continue;
      const Plane cand = Plane::through(a, nrm);
      std::size_t count = 0;
      double sum = 0.0;
      for (auto i : remaining) {
        const double d = std::abs(cand.signed_distance(cloud.points[i]));
        if (d <= eps) {
          ++count;
          sum += d;
        }
      }
      if (count < params.min_support) continue;
      const double s = detail::plane_score(params, sum / count, count, remaining.size());
      if (s > best_score) {
        best_score = s;
        best = cand;
      }
    }
    if (!best) break;

    Plane plane = *best;
    std::vector<std::uint32_t> in;
    for (int it = 0; it < 3; ++it) {
      in.clear();
      for (auto i : remaining)
        if (std::abs(plane.signed_distance(cloud.points[i])) <= eps) in.push_back(i);
      if (in.size() < 3) break;
      try {
        plane = fit_plane(detail::gather(cloud, in));
      } catch (const Error&) {
        break;
      }
    }
    in.clear();
    for (auto i : remaining)
      if (std::abs(plane.signed_distance(cloud.points[i])) <= eps) in.push_back(i);
    if (in.size() < params.min_support) {
      // Refit drifted off the support; claim the raw proposal instead.
      plane = *best;
      in.clear();
      for (auto i : remaining)
        if (std::abs(plane.signed_distance(cloud.points[i])) <= eps) in.push_back(i);
    }
    const int id = static_cast<int>(planes.size());
    for (auto i : in) owner[i] = id;
    planes.push_back(plane);
  }
  if (planes.empty()) throw Error(ErrorKind::NoPlanesFound, "no plane reached min_support");

  // Polish: move each claimed point to its nearest plane, refit, repeat.
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (owner[i] < 0) continue;
      int bestp = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < planes.size(); ++k) {
        const double d = std::abs(planes[k].signed_distance(cloud.points[i]));
        if (d <= eps && d < bd) {
          bd = d;
          bestp = static_cast<int>(k);
        }
      }
      owner[i] = bestp;
    }
  };
  for (std::size_t round = 0; round < params.polish_rounds; ++round) {
    assign();
    std::vector<std::vector<std::uint32_t>> members(planes.size());
    for (std::uint32_t i = 0; i < n; ++i)
      if (owner[i] >= 0) members[owner[i]].push_back(i);
    std::vector<Plane> kept;
    for (std::size_t k = 0; k < planes.size(); ++k) {
      if (members[k].size() < params.min_support) continue;
      kept.push_back(detail::robust_fit(cloud, members[k], planes[k]));
    }
    if (kept.empty()) throw Error(ErrorKind::NoPlanesFound, "no plane reached min_support");
    planes = std::move(kept);
    for (auto& o : owner) o = o >= 0 ? 0 : -1;
  }
  assign();

  std::vector<DetectedPlane> out;
  std::vector<std::vector<std::uint32_t>> members(planes.size());
  for (std::uint32_t i = 0; i < n; ++i)
    if (owner[i] >= 0) members[owner[i]].push_back(i);
  std::size_t claimed = 0;
  for (const auto& m : members) claimed += m.size();
  for (std::size_t k = 0; k < planes.size(); ++k) {
    if (members[k].size() < params.min_support) continue;
    DetectedPlane dp;
    dp.plane = planes[k];
    dp.inliers = std::move(members[k]);
    double sum = 0.0;
    for (auto i : dp.inliers) sum += std::abs(dp.plane.signed_distance(cloud.points[i]));
    dp.score = detail::plane_score(params, sum / dp.inliers.size(), dp.inliers.size(), claimed);
    update_footprint(dp, cloud, params.alpha);
    if (dp.footprint.area() > 0.0) out.push_back(std::move(dp));
  }
  if (out.empty()) throw Error(ErrorKind::NoPlanesFound, "no plane reached min_support");
  return out;
}

/// Number of points of either plane lying within epsilon of both planes.
inline std::size_t shared_point_count(const DetectedPlane& a, const DetectedPlane& b, const PointCloud& cloud,
                                      double epsilon) {
  std::size_t count = 0;
  auto near_both = [&](std::uint32_t i) {
    const Vec3& p = cloud.points[i];
    return std::abs(a.plane.signed_distance(p)) <= epsilon && std::abs(b.plane.signed_distance(p)) <= epsilon;
  };
  // Union of the two inlier sets (both ascending).
  std::size_t i = 0, j = 0;
  while (i < a.inliers.size() || j < b.inliers.size()) {
    std::uint32_t v;
    if (j == b.inliers.size() || (i < a.inliers.size() && a.inliers[i] < b.inliers[j])) {
      v = a.inliers[i++];
    } else if (i == a.inliers.size() || b.inliers[j] < a.inliers[i]) {
      v = b.inliers[j++];
    } else {
      v = a.inliers[i++];
      ++j;
    }
    if (near_both(v)) ++count;
  }
  return count;
}

/// Plane refinement rule: acute normal angle below theta and more shared
/// points than min(|A|, |B|) / divisor.
inline bool prr_should_merge(const DetectedPlane& a, const DetectedPlane& b, const PointCloud& cloud,
                             const DetectionParams& params) {
  const double theta = params.theta_deg * std::numbers::pi / 180.0;
  if (!(acute_angle_between(a.plane, b.plane) < theta)) return false;
  const double nt = static_cast<double>(std::min(a.inliers.size(), b.inliers.size())) / params.merge_divisor;
  return static_cast<double>(shared_point_count(a, b, cloud, params.epsilon)) > nt;
}

/// Merges the first mergeable pair in index order until none is left.
inline std::vector<DetectedPlane> refine_planes(std::vector<DetectedPlane> planes, const PointCloud& cloud,
                                                const DetectionParams& params) {
  for (;;) {
    bool merged = false;
    for (std::size_t i = 0; i < planes.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < planes.size() && !merged; ++j) {
        if (!prr_should_merge(planes[i], planes[j], cloud, params)) continue;
        DetectedPlane m;
        std::set_union(planes[i].inliers.begin(), planes[i].inliers.end(), planes[j].inliers.begin(),
                       planes[j].inliers.end(), std::back_inserter(m.inliers));
        m.plane = detail::robust_fit(cloud, m.inliers, planes[i].plane);
        double sum = 0.0;
        for (auto k : m.inliers) sum += std::abs(m.plane.signed_distance(cloud.points[k]));
        m.score = detail::plane_score(params, sum / m.inliers.size(), m.inliers.size(), cloud.size());
        update_footprint(m, cloud, params.alpha);
        planes[i] = std::move(m);
        planes.erase(planes.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
    if (!merged) return planes;
  }
}

}  // namespace polyrecon
