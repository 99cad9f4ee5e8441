#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polyrecon/error.hpp"
#include "polyrecon/kdtree.hpp"
#include "polyrecon/vec.hpp"

namespace polyrecon {

struct PointCloud {
  std::vector<Vec3> points;
  /// Median nearest-neighbour distance.
  double avg_spacing = 0.0;
  Aabb bbox;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Median nearest-neighbour distance; 0 for fewer than two points.
inline double median_spacing(const std::vector<Vec3>& points) {
  if (points.size() < 2) return 0.0;
  const KdTree tree(points);
  std::vector<double> d;
  d.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = tree.knn(points[i], 1, static_cast<std::int64_t>(i));
    d.push_back(distance(points[i], points[nn[0]]));
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

/// Builds a cloud, dropping points within 1e-12 of an earlier point when
/// `dedup` is set, and computes the spacing statistics.
inline PointCloud make_cloud(std::vector<Vec3> points, bool dedup = true) {
  PointCloud c;
  if (dedup && points.size() > 1) {
    const KdTree tree(points);
    std::vector<char> drop(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (auto j : tree.radius(points[i], 1e-24)) {
        if (j < i && !drop[j]) {
          drop[i] = 1;
          break;
        }
      }
    }
    std::size_t w = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!drop[i]) points[w++] = points[i];
    }
    points.resize(w);
  }
  c.points = std::move(points);
  c.bbox = bounding_box(c.points);
  c.avg_spacing = median_spacing(c.points);
  return c;
}

enum class CloudFormat { Auto, Xyz, Ply };

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

inline std::vector<Vec3> parse_xyz(std::string_view text, const std::string& name) {
  std::vector<Vec3> pts;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tok = split_ws(line);
    if (tok.size() < 3) {
      throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line_no) + ": expected 3 coordinates");
    }
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      double v = 0.0;
      if (!parse_double(tok[a], v) || !std::isfinite(v)) {
        throw Error(ErrorKind::ParseError,
                    name + ":" + std::to_string(line_no) + ": bad coordinate '" + std::string(tok[a]) + "'");
      }
      p[a] = v;
    }
    pts.push_back(p);
  }
  return pts;
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
  std::size_t body_line = 0;
};

inline std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

inline double ply_read_binary(const char* p, const std::string& t) {
  static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes a little-endian host");
  auto get = [p]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<double>(v);
  };
  if (t == "char" || t == "int8") return get(std::int8_t{});
  if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
  if (t == "short" || t == "int16") return get(std::int16_t{});
  if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
  if (t == "int" || t == "int32") return get(std::int32_t{});
  if (t == "uint" || t == "uint32") return get(std::uint32_t{});
  if (t == "float" || t == "float32") return get(float{});
  return get(double{});
}

inline PlyHeader parse_ply_header(std::string_view text, const std::string& name) {
  PlyHeader h;
  std::size_t pos = 0, line_no = 0;
  bool format_seen = false;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line_no) + ": " + msg);
  };
  for (;;) {
    if (pos >= text.size()) fail("missing end_header");
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) fail("missing end_header");
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    const auto tok = split_ws(line);
    if (line_no == 1) {
      if (line != "ply") fail("not a PLY file");
      continue;
    }
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) fail("bad format line");
      if (tok[1] == "ascii") {
        h.binary = false;
      } else if (tok[1] == "binary_little_endian") {
        h.binary = true;
      } else {
        fail("unsupported PLY format '" + std::string(tok[1]) + "'");
      }
      format_seen = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail("bad element line");
      PlyElement e;
      e.name = tok[1];
      double c = 0.0;
      if (!parse_double(tok[2], c) || c < 0 || c != std::floor(c)) fail("bad element count");
      e.count = static_cast<std::size_t>(c);
      h.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (h.elements.empty()) fail("property before element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        p.count_type = tok[2];
        p.type = tok[3];
        p.name = tok[4];
        if (!ply_type_size(p.count_type)) fail("unknown PLY type '" + p.count_type + "'");
      } else if (tok.size() == 3) {
        p.type = tok[1];
        p.name = tok[2];
      } else {
        fail("bad property line");
      }
      if (!ply_type_size(p.type)) fail("unknown PLY type '" + p.type + "'");
      h.elements.back().props.push_back(std::move(p));
    } else if (tok[0] == "end_header") {
      break;
    } else {
      fail("unexpected header line");
    }
  }
  if (!format_seen) fail("missing format line");
  h.body_offset = pos;
  h.body_line = line_no;
  return h;
}

inline std::vector<Vec3> parse_ply(std::string_view text, const std::string& name) {
  const PlyHeader h = parse_ply_header(text, name);
  std::vector<Vec3> pts;
  std::size_t pos = h.body_offset, line_no = h.body_line;
  for (const auto& e : h.elements) {
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < e.props.size(); ++k) {
      if (e.props[k].is_list) continue;
      if (e.props[k].name == "x") ix = static_cast<int>(k);
      if (e.props[k].name == "y") iy = static_cast<int>(k);
      if (e.props[k].name == "z") iz = static_cast<int>(k);
    }
    const bool is_vertex = e.name == "vertex";
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw Error(ErrorKind::ParseError, name + ": vertex element lacks x, y, z");
    }
    for (std::size_t r = 0; r < e.count; ++r) {
      std::vector<double> values(e.props.size(), 0.0);
      if (h.binary) {
        for (std::size_t k = 0; k < e.props.size(); ++k) {
          const auto& p = e.props[k];
          auto need = [&](std::size_t n) {
            if (pos + n > text.size()) {
              throw Error(ErrorKind::ParseError, name + ": byte " + std::to_string(pos) + ": truncated binary body");
            }
          };
          if (p.is_list) {
            const std::size_t cs = ply_type_size(p.count_type);
            need(cs);
            const double cnt = ply_read_binary(text.data() + pos, p.count_type);
            pos += cs;
            if (cnt < 0) throw Error(ErrorKind::ParseError, name + ": byte " + std::to_string(pos) + ": bad list size");
            const std::size_t bytes = static_cast<std::size_t>(cnt) * ply_type_size(p.type);
            need(bytes);
            pos += bytes;
          } else {
            const std::size_t s = ply_type_size(p.type);
            need(s);
            values[k] = ply_read_binary(text.data() + pos, p.type);
            if (is_vertex && !std::isfinite(values[k]) &&
                (static_cast<int>(k) == ix || static_cast<int>(k) == iy || static_cast<int>(k) == iz)) {
              throw Error(ErrorKind::ParseError,
                          name + ": byte " + std::to_string(pos) + ": non-finite coordinate");
            }
            pos += s;
          }
        }
      } else {
        if (pos >= text.size()) {
          throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line_no + 1) + ": unexpected end of file");
        }
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto tok = split_ws(trim(text.substr(pos, nl - pos)));
        pos = nl + 1;
        ++line_no;
        if (!is_vertex) continue;
        std::size_t t = 0;
        for (std::size_t k = 0; k < e.props.size(); ++k) {
          const auto& p = e.props[k];
          auto bad = [&] {
            throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line_no) + ": malformed vertex record");
          };
          if (t >= tok.size()) bad();
          double v = 0.0;
          if (!parse_double(tok[t++], v)) bad();
          if (p.is_list) {
            t += static_cast<std::size_t>(std::max(0.0, v));
            continue;
          }
          if (!std::isfinite(v)) {
            throw Error(ErrorKind::ParseError, name + ":" + std::to_string(line_no) + ": non-finite coordinate");
          }
          // Store at the declared precision so ASCII and binary twins agree.
          if (p.type == "float" || p.type == "float32") v = static_cast<float>(v);
          values[k] = v;
        }
      }
      if (is_vertex) pts.push_back({values[ix], values[iy], values[iz]});
    }
    if (is_vertex) break;
  }
  return pts;
}

}  // namespace detail

/// Reads an XYZ or PLY point cloud. Auto format picks by extension.
inline PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format = CloudFormat::Auto) {
  const std::string text = detail::read_file(path);
  const std::string name = path.filename().string();
  if (text.empty()) throw Error(ErrorKind::ParseError, name + ": empty file");
  if (format == CloudFormat::Auto) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    format = ext == ".ply" ? CloudFormat::Ply : CloudFormat::Xyz;
  }
  auto pts = format == CloudFormat::Ply ? detail::parse_ply(text, name) : detail::parse_xyz(text, name);
  if (pts.empty()) throw Error(ErrorKind::EmptyCloud, name + ": no points");
  return make_cloud(std::move(pts));
}

inline void save_cloud_xyz(std::span<const Vec3> points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  char buf[96];
  for (const auto& p : points) {
    const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out.write(buf, n);
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

inline void save_cloud_ply(std::span<const Vec3> points, const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << points.size() << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "end_header\n";
  char buf[96];
  for (const auto& p : points) {
    if (binary) {
      const double v[3] = {p.x, p.y, p.z};
      out.write(reinterpret_cast<const char*>(v), sizeof v);
    } else {
      const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
      out.write(buf, n);
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

/// Seeded dart throwing: visits points in a random permutation and keeps a
/// point when no kept point lies closer than `radius`.
inline PointCloud poisson_resample(const PointCloud& cloud, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw Error(ErrorKind::ConfigError, "poisson radius must be positive");
  const std::size_t n = cloud.points.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  const double cell = std::max(radius, 1e-9 * std::max(cloud.bbox.diagonal(), 1e-300));
  const Vec3 lo = cloud.bbox.empty() ? Vec3{} : cloud.bbox.lo;
  auto key_of = [&](const Vec3& p) {
    return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor((p.x - lo.x) / cell)),
                                       static_cast<std::int64_t>(std::floor((p.y - lo.y) / cell)),
                                       static_cast<std::int64_t>(std::floor((p.z - lo.z) / cell))};
  };
  auto hash = [](const std::array<std::int64_t, 3>& k) {
    return static_cast<std::uint64_t>(k[0]) * 73856093ull ^ static_cast<std::uint64_t>(k[1]) * 19349663ull ^
           static_cast<std::uint64_t>(k[2]) * 83492791ull;
  };
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::array<std::int64_t, 3>, std::size_t>>> grid;
  const double r2 = radius * radius;
  std::vector<char> keep(n, 0);
  for (std::size_t i : order) {
    const Vec3& p = cloud.points[i];
    const auto k = key_of(p);
    bool ok = true;
    for (int dx = -1; dx <= 1 && ok; ++dx)
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dz = -1; dz <= 1 && ok; ++dz) {
          const std::array<std::int64_t, 3> nk{k[0] + dx, k[1] + dy, k[2] + dz};
          auto it = grid.find(hash(nk));
          if (it == grid.end()) continue;
          for (const auto& [key, j] : it->second) {
            if (key == nk && squared_distance(p, cloud.points[j]) < r2) {
              ok = false;
              break;
            }
          }
        }
    if (!ok) continue;
    keep[i] = 1;
    grid[hash(k)].push_back({k, i});
  }
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) pts.push_back(cloud.points[i]);
  }
  return make_cloud(std::move(pts), false);
}

/// k nearest neighbours of every point, excluding itself.
inline std::vector<std::vector<std::uint32_t>> knn_graph(const std::vector<Vec3>& points, std::size_t k) {
  const KdTree tree(points);
  std::vector<std::vector<std::uint32_t>> nbrs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) nbrs[i] = tree.knn(points[i], k, static_cast<std::int64_t>(i));
  return nbrs;
}

/// Indices of points that appear in none of their neighbours' k-NN sets.
inline std::vector<std::size_t> outlier_indices(const std::vector<Vec3>& points, std::size_t k) {
  const auto nbrs = knn_graph(points, k);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool mutual = false;
    for (auto j : nbrs[i]) {
      const auto& nj = nbrs[j];
      if (std::find(nj.begin(), nj.end(), static_cast<std::uint32_t>(i)) != nj.end()) {
        mutual = true;
        break;
      }
    }
    if (!mutual) out.push_back(i);
  }
  return out;
}

/// Single-pass mutual-neighbour outlier filter.
inline PointCloud remove_outliers(const PointCloud& cloud, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::ConfigError, "outlier k must be at least 1");
  if (cloud.points.size() <= k) return cloud;
  const auto bad = outlier_indices(cloud.points, k);
  std::vector<Vec3> pts;
  pts.reserve(cloud.points.size() - bad.size());
  std::size_t b = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (b < bad.size() && bad[b] == i) {
      ++b;
      continue;
    }
    pts.push_back(cloud.points[i]);
  }
  return make_cloud(std::move(pts), false);
}

}  // namespace polyrecon
