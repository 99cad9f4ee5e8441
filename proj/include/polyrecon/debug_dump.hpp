#pragma once

// Optional intermediate files for inspecting each stage.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/orient.hpp"
#include "polyrecon/partition.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/poly_mesh.hpp"

namespace polyrecon::debug {

namespace fs = std::filesystem;

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

inline std::string plane_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "plane_%03zu.ply", i);
  return buf;
}

/// One colored PLY of inliers per plane and a manifest of plane equations.
inline void dump_planes(const fs::path& dir, const std::vector<DetectedPlane>& planes, const PointCloud& cloud) {
  ensure_dir(dir);
  nlohmann::json manifest = nlohmann::json::array();
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const auto& p = planes[i];
    // Golden-ratio hue walk keeps neighbouring ids apart.
    const double h = std::fmod(0.618033988749895 * static_cast<double>(i), 1.0);
    const int rgb[3] = {static_cast<int>(255 * std::abs(std::sin(6.2832 * h))),
                        static_cast<int>(255 * std::abs(std::sin(6.2832 * (h + 0.33)))),
                        static_cast<int>(255 * std::abs(std::sin(6.2832 * (h + 0.66))))};
    std::ofstream out(dir / plane_name(i), std::ios::binary);
    out << "ply\nformat ascii 1.0\nelement vertex " << p.inliers.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    char buf[128];
    for (auto k : p.inliers) {
      const auto& v = cloud.points[k];
      const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d %d %d\n", v.x, v.y, v.z, rgb[0], rgb[1], rgb[2]);
      out.write(buf, n);
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + (dir / plane_name(i)).string());
    manifest.push_back({{"id", i},
                        {"normal", {p.plane.normal.x, p.plane.normal.y, p.plane.normal.z}},
                        {"offset", p.plane.offset},
                        {"inliers", p.inliers.size()},
                        {"footprint_area", p.footprint.area()},
                        {"file", plane_name(i)}});
  }
  write_text(dir / "planes_manifest.json", manifest.dump(2) + "\n");
}

/// Cells as one OBJ object each, and the adjacency edge list.
inline void dump_complex(const fs::path& dir, const CellComplex& cx) {
  ensure_dir(dir);
  std::ofstream obj(dir / "cells.obj", std::ios::binary);
  std::size_t base = 1;
  char buf[96];
  for (std::size_t c = 0; c < cx.cells.size(); ++c) {
    obj << "o cell_" << c << '\n';
    for (const auto& f : cx.cells[c].faces)
      for (const auto& v : f.vertices) {
        const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        obj.write(buf, n);
      }
    for (const auto& f : cx.cells[c].faces) {
      obj << 'f';
      for (std::size_t k = 0; k < f.vertices.size(); ++k) obj << ' ' << base + k;
      obj << '\n';
      base += f.vertices.size();
    }
  }
  if (!obj) throw Error(ErrorKind::IoError, "write failed for cells.obj");
  nlohmann::json adj = nlohmann::json::array();
  for (const auto& a : cx.adjacency)
    adj.push_back({{"a", a.cell_a}, {"b", a.cell_b}, {"source", a.source}, {"area", a.polygon.area()}});
  write_text(dir / "adjacency.json", adj.dump(2) + "\n");
}

inline PolyMesh polygons_to_mesh(const std::vector<ConvexPolygon>& polys) {
  PolyMesh m;
  for (const auto& p : polys) {
    std::vector<std::uint32_t> f;
    for (const auto& v : p.vertices) {
      f.push_back(static_cast<std::uint32_t>(m.vertices.size()));
      m.vertices.push_back(v);
    }
    m.faces.push_back(std::move(f));
    m.face_planes.push_back(-1);
    m.face_candidate.push_back(1);
  }
  return m;
}

/// Per iteration: labels, winding values and unary costs, plus the
/// oriented face set as a PLY.
inline void dump_orientation(const fs::path& dir, const LabelState& st, std::span<const FaceRecord> faces) {
  ensure_dir(dir);
  for (const auto& rec : st.history) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t i = 0; i < rec.graph.size(); ++i) {
      cells[std::to_string(rec.graph.cells[i])] = {{"label", to_string(rec.labels[rec.graph.cells[i]])},
                                                   {"tentative", rec.tentative[i] ? "in" : "out"},
                                                   {"w", rec.graph.w[i]},
                                                   {"cost_in", rec.graph.cost_in[i]},
                                                   {"cost_out", rec.graph.cost_out[i]}};
    }
    nlohmann::json doc = {{"iteration", rec.iteration}, {"cells", cells}};
    write_text(dir / ("orient_iter_" + std::to_string(rec.iteration) + ".json"), doc.dump(2) + "\n");
    std::vector<ConvexPolygon> s;
    for (int id : rec.oriented_faces) s.push_back(id > 0 ? faces[id - 1].polygon : faces[-id - 1].polygon.reversed());
    save_mesh(polygons_to_mesh(s), dir / ("oriented_faces_iter_" + std::to_string(rec.iteration) + ".ply"),
              MeshFormat::Ply);
  }
}

}  // namespace polyrecon::debug
