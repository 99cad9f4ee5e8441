#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polyrecon/error.hpp"
#include "polyrecon/point_cloud.hpp"
#include "polyrecon/polygon.hpp"

namespace polyrecon {

/// Indexed polygon mesh; faces are planar rings, counter-clockwise seen from
/// outside.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<std::uint32_t>> faces;
  std::vector<int> face_planes;  // source plane id per face, -1 if none
  std::vector<char> face_candidate;  // coverage above the candidate threshold

  std::size_t num_faces() const { return faces.size(); }

  std::vector<Vec3> ring(std::size_t f) const {
    std::vector<Vec3> r;
    r.reserve(faces[f].size());
    for (auto i : faces[f]) r.push_back(vertices[i]);
    return r;
  }

  /// Unit normal of face `f` from its Newell vector.
  Vec3 normal(std::size_t f) const { return normalized(ring_area_vector(ring(f))); }

  ConvexPolygon polygon(std::size_t f) const {
    ConvexPolygon p;
    p.vertices = ring(f);
    const Vec3 n = normalized(ring_area_vector(p.vertices));
    p.plane = Plane::through(p.vertices[0], n);
    return p;
  }

  std::size_t num_edges() const {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> e;
    for (const auto& f : faces)
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto a = f[i], b = f[(i + 1) % f.size()];
        e[{std::min(a, b), std::max(a, b)}]++;
      }
    return e.size();
  }
};

/// Every directed edge is matched by exactly one opposite edge.
inline bool is_watertight(const PolyMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
  for (const auto& f : mesh.faces)
    for (std::size_t i = 0; i < f.size(); ++i) count[{f[i], f[(i + 1) % f.size()]}]++;
  for (const auto& [e, n] : count) {
    if (n != 1) return false;
    auto it = count.find({e.second, e.first});
    if (it == count.end() || it->second != 1) return false;
  }
  return !mesh.faces.empty();
}

inline long euler_characteristic(const PolyMesh& mesh) {
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& f : mesh.faces)
    for (auto i : f) used[i] = 1;
  const long v = std::count(used.begin(), used.end(), 1);
  return v - static_cast<long>(mesh.num_edges()) + static_cast<long>(mesh.faces.size());
}

enum class MeshFormat { Auto, Obj, Ply };

namespace detail {

inline MeshFormat resolve_mesh_format(const std::filesystem::path& path, MeshFormat f) {
  if (f != MeshFormat::Auto) return f;
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? MeshFormat::Ply : MeshFormat::Obj;
}

}  // namespace detail

/// Writes polygons as-is (no triangulation). OBJ carries `v` and `f` records
/// only; PLY adds per-face plane id and candidate flag.
inline void save_mesh(const PolyMesh& mesh, const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto) {
  format = detail::resolve_mesh_format(path, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  char buf[96];
  if (format == MeshFormat::Obj) {
    for (const auto& v : mesh.vertices) {
      const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
      out.write(buf, n);
    }
    for (const auto& f : mesh.faces) {
      out << 'f';
      for (auto i : f) out << ' ' << (i + 1);
      out << '\n';
    }
  } else {
    out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nelement face " << mesh.faces.size()
        << "\nproperty list uchar int vertex_indices\nproperty int plane_id\nproperty uchar candidate\nend_header\n";
    for (const auto& v : mesh.vertices) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
      out.write(buf, n);
    }
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
      const auto& f = mesh.faces[fi];
      if (f.size() > 255) throw Error(ErrorKind::IoError, "face with more than 255 vertices cannot be written to PLY");
      out << f.size();
      for (auto i : f) out << ' ' << i;
      out << ' ' << (fi < mesh.face_planes.size() ? mesh.face_planes[fi] : -1) << ' '
          << (fi < mesh.face_candidate.size() ? int(mesh.face_candidate[fi]) : 1) << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

/// Reads an OBJ (v/f records; other records ignored) or an ASCII PLY mesh.
inline PolyMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto) {
  format = detail::resolve_mesh_format(path, format);
  const std::string text = detail::read_file(path);
  const std::string name = path.filename().string();
  if (text.empty()) throw Error(ErrorKind::ParseError, name + ": empty file");
  PolyMesh mesh;
  auto bad = [&](std::size_t line) {
    throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line) + ": malformed record");
  };
  auto parse_index = [&](std::string_view tok, std::size_t line, std::size_t count, bool one_based) {
    const auto slash = tok.find('/');
    if (slash != std::string_view::npos) tok = tok.substr(0, slash);
    double v = 0.0;
    if (!detail::parse_double(tok, v) || v != std::floor(v)) bad(line);
    long long i = static_cast<long long>(v);
    if (one_based) i = i < 0 ? static_cast<long long>(count) + i : i - 1;
    if (i < 0) bad(line);
    return static_cast<std::uint32_t>(i);
  };
  if (format == MeshFormat::Obj) {
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      const auto tok = detail::split_ws(detail::trim(std::string_view(text).substr(pos, nl - pos)));
      pos = nl + 1;
      ++line_no;
      if (tok.empty()) continue;
      if (tok[0] == "v") {
        if (tok.size() < 4) bad(line_no);
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
          if (!detail::parse_double(tok[a + 1], p[a]) || !std::isfinite(p[a])) bad(line_no);
        }
        mesh.vertices.push_back(p);
      } else if (tok[0] == "f") {
        if (tok.size() < 4) bad(line_no);
        std::vector<std::uint32_t> f;
        for (std::size_t k = 1; k < tok.size(); ++k) f.push_back(parse_index(tok[k], line_no, mesh.vertices.size(), true));
        mesh.faces.push_back(std::move(f));
        mesh.face_planes.push_back(-1);
        mesh.face_candidate.push_back(1);
      }
    }
  } else {
    const auto h = detail::parse_ply_header(text, name);
    if (h.binary) throw Error(ErrorKind::ParseError, name + ": binary PLY meshes are not supported");
    std::size_t pos = h.body_offset, line_no = h.body_line;
    for (const auto& e : h.elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        if (pos >= text.size()) bad(line_no + 1);
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const auto tok = detail::split_ws(detail::trim(std::string_view(text).substr(pos, nl - pos)));
        pos = nl + 1;
        ++line_no;
        std::size_t t = 0;
        Vec3 p;
        std::vector<std::uint32_t> ring;
        int plane_id = -1, candidate = 1;
        for (const auto& prop : e.props) {
          if (t >= tok.size()) bad(line_no);
          double v = 0.0;
          if (!detail::parse_double(tok[t++], v)) bad(line_no);
          if (prop.is_list) {
            const auto cnt = static_cast<std::size_t>(v);
            if (t + cnt > tok.size()) bad(line_no);
            for (std::size_t k = 0; k < cnt; ++k) {
              const auto idx = parse_index(tok[t++], line_no, 0, false);
              if (prop.name == "vertex_indices" || prop.name == "vertex_index") ring.push_back(idx);
            }
          } else if (e.name == "vertex") {
            if (!std::isfinite(v)) bad(line_no);
            if (prop.name == "x") p.x = v;
            if (prop.name == "y") p.y = v;
            if (prop.name == "z") p.z = v;
          } else if (prop.name == "plane_id") {
            plane_id = static_cast<int>(v);
          } else if (prop.name == "candidate") {
            candidate = static_cast<int>(v);
          }
        }
        if (e.name == "vertex") {
          mesh.vertices.push_back(p);
        } else if (e.name == "face") {
          mesh.faces.push_back(std::move(ring));
          mesh.face_planes.push_back(plane_id);
          mesh.face_candidate.push_back(static_cast<char>(candidate));
        }
      }
    }
  }
  for (const auto& f : mesh.faces)
    for (auto i : f)
      if (i >= mesh.vertices.size()) throw Error(ErrorKind::ParseError, name + ": face index out of range");
  return mesh;
}

}  // namespace polyrecon
