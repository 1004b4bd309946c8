#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carre/geometries.hpp"
#include "carre/quad.hpp"

namespace carre {

/// Declarative run description.  The file format is line-based key/value
/// blocks:
///
///   geometry {
///     kind = heisenberg
///   }
///   problem {
///     u = tanh(x1 / sqrt(2))
///     F = s - s^3
///   }
///   grid {
///     box = -10 10            # per axis "lo hi", axes separated by ';'
///     nodes = 1024            # per axis, ';'-separated or broadcast
///     rule = gauss-legendre
///   }
///   run {
///     checks = residual ; stability
///     seed = 7
///   }
///   check stability {
///     tol = 1e-6
///     basis = 120
///   }
///
/// '#' starts a comment.  Values run to the end of the line; lists split
/// on ';' (expressions never contain semicolons).
struct RunConfig {
  GeometrySpec geometry;
  bool has_geometry = false;

  std::string u_expression;
  std::string F_expression;

  Box box;
  std::vector<int> nodes_per_axis;
  QuadratureRule rule = QuadratureRule::GaussLegendre;
  bool has_grid = false;

  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  int sample_points = 200;
  int sample_functions = 20;
  int threads = 0;  // 0 = hardware default
  bool csv = false;
  std::string out_dir = "reports";

  // raw per-check options ("check stability { tol = ... }")
  std::map<std::string, std::map<std::string, std::string>> check_options;

  std::string option(const std::string& check, const std::string& key,
                     const std::string& fallback = {}) const;
  double option_num(const std::string& check, const std::string& key,
                    double fallback) const;
};

struct ConfigDiagnostic {
  int line = 0;  // 1-based
  int column = 0;
  std::string message;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<ConfigDiagnostic> diagnostics;
  bool ok() const { return config.has_value(); }
};

ConfigResult parse_config(const std::string& text);
ConfigResult load_config(const std::string& path);

/// Cross-field validation: known check names, check/geometry compatibility,
/// grid dimension agreement.  Returns human-readable errors.
std::vector<std::string> validate_config(const RunConfig& config);

}  // namespace carre
