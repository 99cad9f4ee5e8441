#pragma once

// Pipeline configuration: defaults, a TOML-subset reader (sections, scalar
// keys, comments), key=value overrides, validation and printing.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polyrecon/error.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/point_cloud.hpp"

namespace polyrecon {

struct PipelineConfig {
  std::uint64_t seed = 1;

  std::size_t outlier_k = 16;
  bool resample = true;
  double resample_radius = 0.0;  // 0 = 2 x spacing of the raw cloud

  DetectionParams detect;

  double sigma = 0.0;  // 0 = 0.005 x bounding-box diagonal
  double min_volume_fraction = 1e-10;

  double t_r = 0.5;
  double lambda_v = 1.0;
  int max_iter = 10;
  double eps_assoc = 0.0;       // 0 = detection epsilon
  double coverage_alpha = 0.0;  // 0 = detection alpha

  bool symmetric_metrics = false;
  std::string debug_dir;
};

namespace detail {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed and counts share one slot type");
using ConfigSlot = std::variant<double*, std::size_t*, int*, bool*, std::string*>;

struct ConfigKey {
  const char* name;
  ConfigSlot slot;
  const char* note;
};

inline std::vector<ConfigKey> config_keys(PipelineConfig& c) {
  return {
      {"seed", &c.seed, nullptr},
      {"preprocess.outlier_k", &c.outlier_k, nullptr},
      {"preprocess.resample", &c.resample, nullptr},
      {"preprocess.resample_radius", &c.resample_radius, "0 = 2 x point spacing"},
      {"detect.epsilon", &c.detect.epsilon, "0 = 2 x point spacing"},
      {"detect.min_support", &c.detect.min_support, "0 = max(50, 0.1% of points)"},
      {"detect.theta_deg", &c.detect.theta_deg, nullptr},
      {"detect.merge_divisor", &c.detect.merge_divisor, nullptr},
      {"detect.w_fidelity", &c.detect.w_fidelity, nullptr},
      {"detect.w_completeness", &c.detect.w_completeness, nullptr},
      {"detect.w_simplicity", &c.detect.w_simplicity, nullptr},
      {"detect.proposals", &c.detect.proposals, nullptr},
      {"detect.sample_neighbors", &c.detect.sample_neighbors, nullptr},
      {"detect.polish_rounds", &c.detect.polish_rounds, nullptr},
      {"detect.alpha", &c.detect.alpha, "0 = (4 x point spacing)^2"},
      {"partition.sigma", &c.sigma, "0 = 0.005 x bbox diagonal"},
      {"partition.min_volume_fraction", &c.min_volume_fraction, nullptr},
      {"orient.t_r", &c.t_r, nullptr},
      {"orient.lambda_v", &c.lambda_v, nullptr},
      {"orient.max_iter", &c.max_iter, nullptr},
      {"orient.eps_assoc", &c.eps_assoc, "0 = detect.epsilon"},
      {"orient.alpha", &c.coverage_alpha, "0 = detect.alpha"},
      {"metrics.symmetric", &c.symmetric_metrics, nullptr},
      {"debug.dir", &c.debug_dir, nullptr},
  };
}

inline std::string format_value(const ConfigSlot& slot) {
  char buf[64];
  return std::visit(
      [&](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          std::snprintf(buf, sizeof buf, "%.17g", *p);
          std::string s = buf;
          if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
          return s;
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          std::string s = "\"";
          for (char ch : *p) {
            if (ch == '"' || ch == '\\') s += '\\';
            s += ch;
          }
          return s + "\"";
        } else {
          return std::to_string(*p);
        }
      },
      slot);
}

inline bool parse_value(std::string_view text, const ConfigSlot& slot) {
  return std::visit(
      [&](auto* p) -> bool {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          double v = 0.0;
          if (!parse_double(text, v) || !std::isfinite(v)) return false;
          *p = v;
          return true;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (text == "true") *p = true;
          else if (text == "false") *p = false;
          else return false;
          return true;
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (text.size() < 2 || text.front() != '"' || text.back() != '"') return false;
          std::string s;
          for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size()) ++i;
            s += text[i];
          }
          *p = s;
          return true;
        } else {
          if (!text.empty() && text.front() == '-') return false;
          T v{};
          const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
          if (ec != std::errc() || end != text.data() + text.size()) return false;
          *p = v;
          return true;
        }
      },
      slot);
}

/// Strips a trailing comment that is not inside a string.
inline std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

/// Sets one dotted key ("orient.t_r") from its TOML-literal text.
inline void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value,
                             const std::string& where = "override") {
  for (auto& k : detail::config_keys(c)) {
    if (key != k.name) continue;
    if (!detail::parse_value(detail::trim(value), k.slot)) {
      throw Error(ErrorKind::ConfigError, where + ": bad value for " + std::string(key) + ": " + std::string(value));
    }
    return;
  }
  throw Error(ErrorKind::ConfigError, where + ": unknown key " + std::string(key));
}

/// Applies "key=value" overrides.
inline void apply_override(PipelineConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigError, "override needs key=value: " + std::string(assignment));
  set_config_value(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline void apply_config_text(PipelineConfig& c, std::string_view text, const std::string& name) {
  std::string section;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = detail::trim(detail::strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    ++line_no;
    const std::string where = name + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ConfigError, where + ": malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigError, where + ": expected key = value");
    std::string key(detail::trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    set_config_value(c, key, line.substr(eq + 1), where);
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  apply_config_text(base, text, path.filename().string());
  return base;
}

/// Rejects out-of-domain parameters before any compute.
inline void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (c.outlier_k < 1) fail("preprocess.outlier_k must be at least 1");
  if (c.resample_radius < 0.0) fail("preprocess.resample_radius must be >= 0");
  const auto& d = c.detect;
  if (d.epsilon < 0.0) fail("detect.epsilon must be >= 0");
  if (d.min_support != 0 && d.min_support < 3) fail("detect.min_support must be 0 or at least 3");
  if (!(d.theta_deg > 0.0 && d.theta_deg < 90.0)) fail("detect.theta_deg must be in (0, 90)");
  if (!(d.merge_divisor >= 1.0)) fail("detect.merge_divisor must be at least 1");
  if (d.w_fidelity < 0.0 || d.w_completeness < 0.0 || d.w_simplicity < 0.0) fail("detect weights must be >= 0");
  if (d.proposals < 1) fail("detect.proposals must be at least 1");
  if (d.sample_neighbors < 3) fail("detect.sample_neighbors must be at least 3");
  if (d.alpha < 0.0) fail("detect.alpha must be >= 0");
  if (c.sigma < 0.0) fail("partition.sigma must be >= 0");
  if (!(c.min_volume_fraction >= 0.0 && c.min_volume_fraction < 1.0)) fail("partition.min_volume_fraction must be in [0, 1)");
  if (!(c.t_r >= 0.0 && c.t_r <= 1.0)) fail("orient.t_r must be in [0, 1]");
  if (c.lambda_v < 0.0) fail("orient.lambda_v must be >= 0");
  if (c.max_iter < 1) fail("orient.max_iter must be at least 1");
  if (c.eps_assoc < 0.0) fail("orient.eps_assoc must be >= 0");
  if (c.coverage_alpha < 0.0) fail("orient.alpha must be >= 0");
}

/// The configuration as a file `load_config` accepts.
inline std::string to_toml(PipelineConfig c) {
  std::string out, section;
  for (const auto& k : detail::config_keys(c)) {
    std::string_view name = k.name;
    const auto dot = name.find('.');
    const std::string sec = dot == std::string_view::npos ? "" : std::string(name.substr(0, dot));
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += std::string(dot == std::string_view::npos ? name : name.substr(dot + 1)) + " = " + detail::format_value(k.slot);
    if (k.note) out += "  # " + std::string(k.note);
    out += '\n';
  }
  return out;
}

}  // namespace polyrecon
