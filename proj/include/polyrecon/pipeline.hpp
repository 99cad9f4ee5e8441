#pragma once

// The reconstruction pipeline, stage by stage, with the JSON files that let
// each stage run in its own process.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyrecon/config.hpp"
#include "polyrecon/debug_dump.hpp"
#include "polyrecon/metrics.hpp"
#include "polyrecon/orient.hpp"
#include "polyrecon/partition.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/point_cloud.hpp"
#include "polyrecon/poly_mesh.hpp"

namespace polyrecon {

namespace fs = std::filesystem;

struct StageTiming {
  std::string name;
  double ms = 0.0;
};

/// Output of the preprocessing and detection stages.
struct PlanesStage {
  std::size_t raw_points = 0;
  PointCloud cloud;  // resampled, then outliers removed
  DetectionParams detect;
  std::vector<DetectedPlane> planes;
};

struct ComplexStage {
  std::size_t raw_points = 0;
  PointCloud cloud;
  double epsilon = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  PlaneClassification classes;
  CellComplex complex;
};

struct PipelineResult {
  std::size_t raw_points = 0;
  std::vector<FaceRecord> faces;
  LabelState labels;
  PolyMesh mesh;
  MetricsReport metrics;
  std::vector<StageTiming> timings;
};

namespace detail {

/// Runs one stage, timing it and prefixing any library error with the stage
/// name and the time spent.
template <class F>
auto run_stage(const char* name, std::vector<StageTiming>* timings, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      if (timings) timings->push_back({name, elapsed()});
    } else {
      auto r = f();
      if (timings) timings->push_back({name, elapsed()});
      return r;
    }
  } catch (const Error& e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " after %.1f ms", elapsed());
    throw Error(e.kind(), std::string("stage '") + name + "' failed" + buf + ": " + e.detail());
  }
}

inline void maybe_dump(const PipelineConfig& cfg, const char* sub, const std::function<void(const fs::path&)>& f) {
  if (!cfg.debug_dir.empty()) f(fs::path(cfg.debug_dir) / sub);
}

}  // namespace detail

inline PlanesStage run_planes(const PointCloud& raw, const PipelineConfig& cfg, std::vector<StageTiming>* timings = nullptr) {
  validate(cfg);
  PlanesStage st;
  st.raw_points = raw.size();
  detail::run_stage("preprocess", timings, [&] {
    if (raw.size() == 0) throw Error(ErrorKind::EmptyCloud, "cloud has no points");
    const double r = cfg.resample_radius > 0.0 ? cfg.resample_radius : 2.0 * raw.avg_spacing;
    const PointCloud sparse = cfg.resample && r > 0.0 ? poisson_resample(raw, r, cfg.seed) : raw;
    st.cloud = remove_outliers(sparse, cfg.outlier_k);
  });
  detail::run_stage("detect", timings, [&] {
    DetectionParams p = cfg.detect;
    p.seed = cfg.seed;
    st.detect = resolve(p, st.cloud);
    st.planes = refine_planes(detect_planes(st.cloud, st.detect), st.cloud, st.detect);
  });
  detail::maybe_dump(cfg, "planes", [&](const fs::path& d) { debug::dump_planes(d, st.planes, st.cloud); });
  return st;
}

inline ComplexStage run_partition(const PlanesStage& in, const PipelineConfig& cfg,
                                  std::vector<StageTiming>* timings = nullptr) {
  validate(cfg);
  ComplexStage st;
  st.raw_points = in.raw_points;
  st.cloud = in.cloud;
  st.epsilon = in.detect.epsilon;
  st.alpha = in.detect.alpha;
  detail::run_stage("partition", timings, [&] {
    st.sigma = cfg.sigma > 0.0 ? cfg.sigma : 0.005 * in.cloud.bbox.diagonal();
    st.classes = classify_planes(in.planes, st.sigma);
    const auto space = build_convex_space(st.classes, in.cloud.bbox);
    PartitionParams pp;
    pp.min_volume_fraction = cfg.min_volume_fraction;
    st.complex = adaptive_partition(space, in.planes, st.classes.internal, pp);
  });
  detail::maybe_dump(cfg, "partition", [&](const fs::path& d) { debug::dump_complex(d, st.complex); });
  return st;
}

inline PipelineResult run_orient(const ComplexStage& in, const PipelineConfig& cfg,
                                 std::vector<StageTiming>* timings = nullptr) {
  validate(cfg);
  PipelineResult res;
  res.raw_points = in.raw_points;
  OrientParams op;
  op.t_r = cfg.t_r;
  op.lambda_v = cfg.lambda_v;
  op.max_iter = cfg.max_iter;
  op.eps_assoc = cfg.eps_assoc > 0.0 ? cfg.eps_assoc : in.epsilon;
  op.alpha = cfg.coverage_alpha > 0.0 ? cfg.coverage_alpha : in.alpha;
  detail::run_stage("orient", timings, [&] {
    res.faces = build_face_records(in.complex, in.cloud, op);
    res.labels = iterate_orientation(in.complex, res.faces, op);
  });
  detail::maybe_dump(cfg, "orient", [&](const fs::path& d) { debug::dump_orientation(d, res.labels, res.faces); });
  detail::run_stage("extract", timings, [&] { res.mesh = extract_mesh(res.labels, in.complex, res.faces); });
  detail::run_stage("metrics", timings, [&] {
    const auto d = hausdorff_and_mean(in.cloud.points, res.mesh, cfg.symmetric_metrics);
    res.metrics = make_report(d, res.mesh, in.raw_points);
  });
  if (timings) res.timings = *timings;
  return res;
}

inline PipelineResult run_pipeline(const PointCloud& raw, const PipelineConfig& cfg) {
  std::vector<StageTiming> timings;
  const auto planes = run_planes(raw, cfg, &timings);
  const auto cx = run_partition(planes, cfg, &timings);
  return run_orient(cx, cfg, &timings);
}

inline PipelineResult run_pipeline(const fs::path& input, const PipelineConfig& cfg) {
  validate(cfg);
  const auto raw = detail::run_stage("load", nullptr, [&] { return load_cloud(input); });
  return run_pipeline(raw, cfg);
}

// ---- serialization ----------------------------------------------------

inline nlohmann::json metrics_json(const MetricsReport& m) {
  nlohmann::json j;
  j["dis_h"] = m.dis_h;
  j["dis_m"] = m.dis_m;
  j["n_points_out"] = m.n_points_out;
  j["n_faces_out"] = m.n_faces_out;
  j["r"] = m.r;
  j["rh"] = m.rh;
  return j;
}

namespace detail {

using nlohmann::json;

inline json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 json_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

inline json polygon_json(const ConvexPolygon& p) {
  json verts = json::array();
  for (const auto& v : p.vertices) verts.push_back(vec_json(v));
  return {{"normal", vec_json(p.plane.normal)}, {"offset", p.plane.offset}, {"vertices", verts}};
}

inline ConvexPolygon json_polygon(const json& j) {
  ConvexPolygon p;
  p.plane.normal = json_vec(j.at("normal"));
  p.plane.offset = j.at("offset").get<double>();
  for (const auto& v : j.at("vertices")) p.vertices.push_back(json_vec(v));
  return p;
}

inline json cell_json(const ConvexCell& c) {
  json faces = json::array();
  for (std::size_t k = 0; k < c.faces.size(); ++k) {
    json f = polygon_json(c.faces[k]);
    f["source"] = c.source_planes[k];
    faces.push_back(f);
  }
  return faces;
}

inline ConvexCell json_cell(const json& j) {
  std::vector<ConvexPolygon> faces;
  std::vector<int> sources;
  for (const auto& f : j) {
    faces.push_back(json_polygon(f));
    sources.push_back(f.at("source").get<int>());
  }
  return ConvexCell(std::move(faces), std::move(sources));
}

inline fs::path sidecar(const fs::path& json_path, const char* suffix) {
  fs::path p = json_path;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

/// Writes the preprocessed cloud next to the JSON file as exact binary
/// doubles.
inline json write_cloud(const fs::path& json_path, const PointCloud& cloud) {
  const auto cp = sidecar(json_path, ".cloud.ply");
  save_cloud_ply(cloud.points, cp, true);
  return {{"cloud", cp.filename().string()}};
}

inline PointCloud read_sidecar(const fs::path& json_path, const json& j, const char* key) {
  const fs::path p = json_path.parent_path() / j.at(key).get<std::string>();
  return make_cloud(load_cloud(p, CloudFormat::Ply).points, false);
}

inline json read_json(const fs::path& path, const char* format) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.filename().string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format) {
    throw Error(ErrorKind::ParseError, path.filename().string() + ": not a " + format + " file");
  }
  return j;
}

template <class F>
auto guarded_parse(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.filename().string() + ": " + e.what());
  }
}

}  // namespace detail

inline void save_planes(const PlanesStage& st, const fs::path& path) {
  using nlohmann::json;
  json j = detail::write_cloud(path, st.cloud);
  j["format"] = "polyrecon-planes";
  j["raw_points"] = st.raw_points;
  j["epsilon"] = st.detect.epsilon;
  j["alpha"] = st.detect.alpha;
  j["min_support"] = st.detect.min_support;
  json planes = json::array();
  for (const auto& p : st.planes) {
    planes.push_back({{"normal", detail::vec_json(p.plane.normal)},
                      {"offset", p.plane.offset},
                      {"score", p.score},
                      {"inliers", p.inliers}});
  }
  j["planes"] = planes;
  debug::write_text(path, j.dump(1) + "\n");
}

inline PlanesStage load_planes(const fs::path& path) {
  const auto j = detail::read_json(path, "polyrecon-planes");
  return detail::guarded_parse(path, [&] {
    PlanesStage st;
    st.raw_points = j.at("raw_points").get<std::size_t>();
    st.cloud = detail::read_sidecar(path, j, "cloud");
    st.detect.epsilon = j.at("epsilon").get<double>();
    st.detect.alpha = j.at("alpha").get<double>();
    st.detect.min_support = j.at("min_support").get<std::size_t>();
    for (const auto& p : j.at("planes")) {
      DetectedPlane dp;
      dp.plane.normal = detail::json_vec(p.at("normal"));
      dp.plane.offset = p.at("offset").get<double>();
      dp.score = p.at("score").get<double>();
      dp.inliers = p.at("inliers").get<std::vector<std::uint32_t>>();
      for (auto i : dp.inliers)
        if (i >= st.cloud.size()) throw Error(ErrorKind::ParseError, path.filename().string() + ": inlier index out of range");
      update_footprint(dp, st.cloud, st.detect.alpha);
      st.planes.push_back(std::move(dp));
    }
    return st;
  });
}

inline void save_complex(const ComplexStage& st, const fs::path& path) {
  using nlohmann::json;
  json j = detail::write_cloud(path, st.cloud);
  j["format"] = "polyrecon-complex";
  j["raw_points"] = st.raw_points;
  j["epsilon"] = st.epsilon;
  j["alpha"] = st.alpha;
  j["sigma"] = st.sigma;
  j["external"] = st.classes.external;
  j["internal"] = st.classes.internal;
  j["split_order"] = st.complex.split_order;
  j["space"] = detail::cell_json(st.complex.space);
  json cells = json::array();
  for (const auto& c : st.complex.cells) cells.push_back(detail::cell_json(c));
  j["cells"] = cells;
  json adj = json::array();
  for (const auto& a : st.complex.adjacency) {
    json r = detail::polygon_json(a.polygon);
    r["a"] = a.cell_a;
    r["b"] = a.cell_b;
    r["source"] = a.source;
    adj.push_back(r);
  }
  j["adjacency"] = adj;
  json hull = json::array();
  for (const auto& h : st.complex.hull_faces) hull.push_back({h.cell, h.face, h.source});
  j["hull_faces"] = hull;
  debug::write_text(path, j.dump(1) + "\n");
}

inline ComplexStage load_complex(const fs::path& path) {
  const auto j = detail::read_json(path, "polyrecon-complex");
  return detail::guarded_parse(path, [&] {
    ComplexStage st;
    st.raw_points = j.at("raw_points").get<std::size_t>();
    st.cloud = detail::read_sidecar(path, j, "cloud");
    st.epsilon = j.at("epsilon").get<double>();
    st.alpha = j.at("alpha").get<double>();
    st.sigma = j.at("sigma").get<double>();
    st.classes.external = j.at("external").get<std::vector<int>>();
    st.classes.internal = j.at("internal").get<std::vector<int>>();
    st.complex.split_order = j.at("split_order").get<std::vector<int>>();
    st.complex.space = detail::json_cell(j.at("space"));
    for (const auto& c : j.at("cells")) st.complex.cells.push_back(detail::json_cell(c));
    const int n = static_cast<int>(st.complex.cells.size());
    auto bad = [&](const char* what) { throw Error(ErrorKind::ParseError, path.filename().string() + ": " + what); };
    for (const auto& a : j.at("adjacency")) {
      Adjacency r;
      r.polygon = detail::json_polygon(a);
      r.cell_a = a.at("a").get<int>();
      r.cell_b = a.at("b").get<int>();
      r.source = a.at("source").get<int>();
      if (r.cell_a < 0 || r.cell_a >= n || r.cell_b < 0 || r.cell_b >= n) bad("adjacency cell out of range");
      st.complex.adjacency.push_back(std::move(r));
    }
    for (const auto& h : j.at("hull_faces")) {
      HullFace f{h.at(0).get<int>(), h.at(1).get<int>(), h.at(2).get<int>()};
      if (f.cell < 0 || f.cell >= n || f.face < 0 || f.face >= static_cast<int>(st.complex.cells[f.cell].faces.size()))
        bad("hull face out of range");
      st.complex.hull_faces.push_back(f);
    }
    return st;
  });
}

}  // namespace polyrecon
