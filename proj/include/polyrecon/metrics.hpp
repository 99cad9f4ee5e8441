#pragma once

// Cloud-to-mesh distances and the simplification figures.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "polyrecon/kdtree.hpp"
#include "polyrecon/poly_mesh.hpp"

namespace polyrecon {

struct MetricsReport {
  double dis_h = 0.0;  // Hausdorff, cloud to mesh
  double dis_m = 0.0;  // mean distance
  std::size_t n_points_out = 0;  // mesh vertices
  std::size_t n_faces_out = 0;
  double r = 0.0;   // vertices over raw input points
  double rh = 0.0;  // dis_h * r
};

struct MeshDistance {
  double max = 0.0;
  double mean = 0.0;
};

/// Exact distance from each point to the nearest mesh polygon.
inline MeshDistance cloud_to_mesh(std::span<const Vec3> points, const PolyMesh& mesh) {
  std::vector<std::vector<Vec3>> rings;
  std::vector<Vec3> normals;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    rings.push_back(mesh.ring(f));
    normals.push_back(mesh.normal(f));
  }
  MeshDistance d;
  CompensatedSum sum;
  for (const auto& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < rings.size(); ++f) best = std::min(best, point_ring_distance(p, rings[f], normals[f]));
    d.max = std::max(d.max, best);
    sum.add(best);
  }
  d.mean = points.empty() ? 0.0 : sum.value() / static_cast<double>(points.size());
  return d;
}

/// Points spread over the mesh faces at roughly `spacing`.
inline std::vector<Vec3> sample_mesh(const PolyMesh& mesh, double spacing) {
  std::vector<Vec3> out(mesh.vertices.begin(), mesh.vertices.end());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto r = mesh.ring(f);
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
      const Vec3 a = r[0], b = r[i], c = r[i + 1];
      const double longest = std::max({distance(a, b), distance(b, c), distance(c, a)});
      const int n = std::max(1, static_cast<int>(std::ceil(longest / spacing)));
      for (int u = 0; u <= n; ++u)
        for (int v = 0; u + v <= n; ++v) out.push_back(a + (b - a) * (double(u) / n) + (c - a) * (double(v) / n));
    }
  }
  return out;
}

/// (dis_h, dis_m) from the cloud to the mesh. With `symmetric`, dis_h also
/// covers mesh samples to their nearest cloud point.
inline MeshDistance hausdorff_and_mean(std::span<const Vec3> points, const PolyMesh& mesh, bool symmetric = false,
                                       double sample_spacing = 0.0) {
  MeshDistance d = cloud_to_mesh(points, mesh);
  if (symmetric && !points.empty()) {
    if (!(sample_spacing > 0.0)) {
      Aabb box;
      for (const auto& v : mesh.vertices) box.extend(v);
      sample_spacing = 0.01 * std::max(box.diagonal(), 1e-300);
    }
    const KdTree tree(points);
    for (const auto& s : sample_mesh(mesh, sample_spacing)) {
      const auto nn = tree.knn(s, 1);
      d.max = std::max(d.max, distance(s, points[nn[0]]));
    }
  }
  return d;
}

inline MetricsReport make_report(const MeshDistance& d, const PolyMesh& mesh, std::size_t raw_points) {
  MetricsReport m;
  m.dis_h = d.max;
  m.dis_m = d.mean;
  m.n_points_out = mesh.vertices.size();
  m.n_faces_out = mesh.num_faces();
  m.r = raw_points ? static_cast<double>(m.n_points_out) / static_cast<double>(raw_points) : 0.0;
  m.rh = m.dis_h * m.r;
  return m;
}

}  // namespace polyrecon
