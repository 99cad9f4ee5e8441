// polyrecon: point cloud to polygonal mesh, whole or stage by stage.
//
//   polyrecon reconstruct scan.ply out.obj --report metrics.json
//   polyrecon planes scan.ply -o planes.json
//   polyrecon partition planes.json -o complex.json
//   polyrecon reconstruct complex.json out.obj
//   polyrecon metrics scan.ply out.obj

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyrecon/pipeline.hpp"

namespace {

using namespace polyrecon;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string debug_dir;
  bool print_config = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "TOML configuration file");
  cmd->add_option("--set", c.overrides, "Override one key, e.g. --set orient.t_r=0.4");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--debug-dir", c.debug_dir, "Write intermediate files here");
  cmd->add_flag("--print-config", c.print_config, "Print the effective configuration and exit");
  cmd->add_flag("-v,--verbose", c.verbose, "Print stage timings to stderr");
}

PipelineConfig make_config(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config, cfg);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.debug_dir.empty()) cfg.debug_dir = c.debug_dir;
  validate(cfg);
  return cfg;
}

enum class InputKind { Cloud, Planes, Complex };

InputKind input_kind(const fs::path& path) {
  if (path.extension() != ".json") return InputKind::Cloud;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.filename().string() + ": " + e.what());
  }
  const std::string f = j.is_object() ? j.value("format", "") : "";
  if (f == "polyrecon-planes") return InputKind::Planes;
  if (f == "polyrecon-complex") return InputKind::Complex;
  throw Error(ErrorKind::ParseError, path.filename().string() + ": unknown stage file");
}

PointCloud load_input_cloud(const fs::path& path) {
  return detail::run_stage("load", nullptr, [&] { return load_cloud(path); });
}

PlanesStage planes_from(const fs::path& in, const PipelineConfig& cfg, std::vector<StageTiming>* t) {
  if (input_kind(in) == InputKind::Planes) return load_planes(in);
  return run_planes(load_input_cloud(in), cfg, t);
}

ComplexStage complex_from(const fs::path& in, const PipelineConfig& cfg, std::vector<StageTiming>* t) {
  if (input_kind(in) == InputKind::Complex) return load_complex(in);
  return run_partition(planes_from(in, cfg, t), cfg, t);
}

void print_timings(const Common& c, const std::vector<StageTiming>& t) {
  if (!c.verbose) return;
  for (const auto& s : t) std::fprintf(stderr, "%-10s %10.1f ms\n", s.name.c_str(), s.ms);
}

void write_report(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    debug::write_text(path, j.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal surface reconstruction from point clouds"};
  app.require_subcommand(1);

  Common common;
  std::string in, out, mesh_path, report;
  bool symmetric = false;

  auto* rec = app.add_subcommand("reconstruct", "Cloud, planes.json or complex.json to a mesh");
  rec->add_option("in", in, "Input")->required();
  rec->add_option("out", out, "Output mesh (.obj or .ply)")->required();
  rec->add_option("--report", report, "Write the metrics JSON here instead of stdout");
  add_common(rec, common);

  auto* pl = app.add_subcommand("planes", "Preprocess and detect planes");
  pl->add_option("in", in, "Input cloud (.ply or .xyz)")->required();
  pl->add_option("-o,--output", out, "Output file")->default_val("planes.json");
  add_common(pl, common);

  auto* pa = app.add_subcommand("partition", "Partition space into convex cells");
  pa->add_option("in", in, "Input cloud or planes.json")->required();
  pa->add_option("-o,--output", out, "Output file")->default_val("complex.json");
  add_common(pa, common);

  auto* me = app.add_subcommand("metrics", "Distances from a cloud to a mesh");
  me->add_option("cloud", in, "Reference cloud")->required();
  me->add_option("mesh", mesh_path, "Mesh (.obj or .ply)")->required();
  me->add_flag("--symmetric", symmetric, "Also measure mesh samples to the cloud");
  me->add_option("-o,--output", report, "Write the JSON here instead of stdout");
  add_common(me, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::ConfigError);
  }

  try {
    PipelineConfig cfg = make_config(common);
    if (symmetric) cfg.symmetric_metrics = true;
    if (common.print_config) {
      std::cout << to_toml(cfg);
      return 0;
    }
    std::vector<StageTiming> timings;

    if (*rec) {
      const auto cx = complex_from(in, cfg, &timings);
      const auto res = run_orient(cx, cfg, &timings);
      save_mesh(res.mesh, out);
      print_timings(common, timings);
      write_report(metrics_json(res.metrics), report);
    } else if (*pl) {
      const auto st = run_planes(load_input_cloud(in), cfg, &timings);
      save_planes(st, out);
      print_timings(common, timings);
      std::fprintf(stderr, "%zu planes -> %s\n", st.planes.size(), out.c_str());
    } else if (*pa) {
      const auto st = complex_from(in, cfg, &timings);
      save_complex(st, out);
      print_timings(common, timings);
      std::fprintf(stderr, "%zu cells -> %s\n", st.complex.cells.size(), out.c_str());
    } else if (*me) {
      const auto cloud = load_input_cloud(in);
      const auto mesh = detail::run_stage("load", nullptr, [&] { return load_mesh(mesh_path); });
      const auto d = hausdorff_and_mean(cloud.points, mesh, cfg.symmetric_metrics);
      write_report(metrics_json(make_report(d, mesh, cloud.size())), report);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "polyrecon: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polyrecon: internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
