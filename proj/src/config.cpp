#include "carre/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace carre {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t semi = value.find(';', start);
    if (semi == std::string::npos) {
      parts.push_back(trim(value.substr(start)));
      break;
    }
    parts.push_back(trim(value.substr(start, semi - start)));
    start = semi + 1;
  }
  return parts;
}

bool parse_number(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && !s.empty();
}

bool parse_int(const std::string& s, long& out) {
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end && *end == '\0' && !s.empty();
}

struct Cursor {
  int line;
  std::vector<ConfigDiagnostic>& diagnostics;
  void error(int column, std::string message) {
    diagnostics.push_back({line, column, std::move(message)});
  }
};

bool parse_geometry_key(RunConfig& cfg, const std::string& key,
                        const std::string& value, Cursor& cur) {
  if (key == "kind") {
    static const std::map<std::string, GeometryKind> kinds = {
        {"euclidean-weighted", GeometryKind::EuclideanWeighted},
        {"euclidean", GeometryKind::EuclideanWeighted},
        {"ornstein-uhlenbeck", GeometryKind::OrnsteinUhlenbeck},
        {"heisenberg", GeometryKind::Heisenberg},
        {"engel", GeometryKind::Engel},
        {"filiform", GeometryKind::Filiform},
        {"grushin", GeometryKind::Grushin},
        {"custom", GeometryKind::Custom}};
    auto it = kinds.find(value);
    if (it == kinds.end()) {
      cur.error(1, "unknown geometry kind '" + value + "'");
      return false;
    }
    cfg.geometry.kind = it->second;
    cfg.has_geometry = true;
    return true;
  }
  if (key == "dimension") {
    long n;
    if (!parse_int(value, n) || n < 1) {
      cur.error(1, "dimension must be a positive integer");
      return false;
    }
    cfg.geometry.dimension = static_cast<int>(n);
    return true;
  }
  if (key == "alpha") {
    long a;
    if (!parse_int(value, a) || a < 1) {
      cur.error(1, "alpha must be an integer >= 1");
      return false;
    }
    cfg.geometry.alpha = static_cast<int>(a);
    return true;
  }
  if (key == "eta") {
    cfg.geometry.eta_expression = value;
    return true;
  }
  if (key == "field") {
    cfg.geometry.custom_frame.push_back(split_list(value));
    return true;
  }
  cur.error(1, "unknown geometry key '" + key + "'");
  return false;
}

bool parse_grid_key(RunConfig& cfg, const std::string& key,
                    const std::string& value, Cursor& cur) {
  if (key == "box") {
    Box box;
    std::vector<double> lo, hi;
    for (const std::string& axis : split_list(value)) {
      std::istringstream is(axis);
      double a, b;
      if (!(is >> a >> b)) {
        cur.error(1, "box axis must be 'lo hi': '" + axis + "'");
        return false;
      }
      if (!(b > a)) {
        cur.error(1, "degenerate box axis '" + axis + "'");
        return false;
      }
      lo.push_back(a);
      hi.push_back(b);
    }
    box.lower = Eigen::Map<Vector>(lo.data(), lo.size());
    box.upper = Eigen::Map<Vector>(hi.data(), hi.size());
    cfg.box = std::move(box);
    cfg.has_grid = true;
    return true;
  }
  if (key == "nodes") {
    cfg.nodes_per_axis.clear();
    for (const std::string& part : split_list(value)) {
      long n;
      if (!parse_int(part, n) || n < 2) {
        cur.error(1, "nodes must be integers >= 2");
        return false;
      }
      cfg.nodes_per_axis.push_back(static_cast<int>(n));
    }
    return true;
  }
  if (key == "rule") {
    if (value == "gauss-legendre")
      cfg.rule = QuadratureRule::GaussLegendre;
    else if (value == "trapezoid")
      cfg.rule = QuadratureRule::Trapezoid;
    else {
      cur.error(1, "unknown quadrature rule '" + value + "'");
      return false;
    }
    return true;
  }
  cur.error(1, "unknown grid key '" + key + "'");
  return false;
}

bool parse_run_key(RunConfig& cfg, const std::string& key,
                   const std::string& value, Cursor& cur) {
  if (key == "checks") {
    cfg.checks = split_list(value);
    return true;
  }
  if (key == "seed") {
    long s;
    if (!parse_int(value, s) || s < 0) {
      cur.error(1, "seed must be a nonnegative integer");
      return false;
    }
    cfg.seed = static_cast<std::uint64_t>(s);
    return true;
  }
  if (key == "sample_points" || key == "sample_functions" ||
      key == "threads") {
    long n;
    if (!parse_int(value, n) || n < 0) {
      cur.error(1, key + " must be a nonnegative integer");
      return false;
    }
    if (key == "sample_points") cfg.sample_points = static_cast<int>(n);
    if (key == "sample_functions") cfg.sample_functions = static_cast<int>(n);
    if (key == "threads") cfg.threads = static_cast<int>(n);
    return true;
  }
  if (key == "csv") {
    cfg.csv = (value == "true" || value == "1" || value == "yes");
    return true;
  }
  if (key == "out") {
    cfg.out_dir = value;
    return true;
  }
  cur.error(1, "unknown run key '" + key + "'");
  return false;
}

}  // namespace

std::string RunConfig::option(const std::string& check, const std::string& key,
                              const std::string& fallback) const {
  auto it = check_options.find(check);
  if (it == check_options.end()) return fallback;
  auto kv = it->second.find(key);
  return kv == it->second.end() ? fallback : kv->second;
}

double RunConfig::option_num(const std::string& check, const std::string& key,
                             double fallback) const {
  const std::string raw = option(check, key);
  if (raw.empty()) return fallback;
  double v;
  return parse_number(raw, v) ? v : fallback;
}

ConfigResult parse_config(const std::string& text) {
  ConfigResult result;
  RunConfig cfg;
  std::vector<ConfigDiagnostic>& diagnostics = result.diagnostics;

  enum class Section { None, Geometry, Problem, Grid, Run, Check };
  Section section = Section::None;
  std::string check_name;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  bool failed = false;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    Cursor cur{line_no, diagnostics};

    if (line == "}") {
      if (section == Section::None) {
        cur.error(1, "unmatched '}'");
        failed = true;
      }
      section = Section::None;
      continue;
    }
    if (line.back() == '{') {
      std::string head = trim(line.substr(0, line.size() - 1));
      if (head == "geometry") section = Section::Geometry;
      else if (head == "problem") section = Section::Problem;
      else if (head == "grid") section = Section::Grid;
      else if (head == "run") section = Section::Run;
      else if (head.rfind("check ", 0) == 0) {
        section = Section::Check;
        check_name = trim(head.substr(6));
        if (check_name.empty()) {
          cur.error(1, "check block needs a name");
          failed = true;
        }
      } else {
        cur.error(1, "unknown section '" + head + "'");
        failed = true;
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      cur.error(1, "expected 'key = value'");
      failed = true;
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const int column = static_cast<int>(raw.find(key)) + 1;
    Cursor vcur{line_no, diagnostics};

    bool ok = true;
    switch (section) {
      case Section::Geometry:
        ok = parse_geometry_key(cfg, key, value, vcur);
        break;
      case Section::Problem:
        if (key == "u") cfg.u_expression = value;
        else if (key == "F") cfg.F_expression = value;
        else {
          vcur.error(column, "unknown problem key '" + key + "'");
          ok = false;
        }
        break;
      case Section::Grid:
        ok = parse_grid_key(cfg, key, value, vcur);
        break;
      case Section::Run:
        ok = parse_run_key(cfg, key, value, vcur);
        break;
      case Section::Check:
        cfg.check_options[check_name][key] = value;
        break;
      case Section::None:
        vcur.error(column, "key outside any section");
        ok = false;
        break;
    }
    failed = failed || !ok;
  }
  if (section != Section::None) {
    diagnostics.push_back({line_no, 1, "unterminated section"});
    failed = true;
  }
  if (!failed) result.config = std::move(cfg);
  return result;
}

ConfigResult load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    ConfigResult result;
    result.diagnostics.push_back({0, 0, "cannot open config '" + path + "'"});
    return result;
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  static const std::vector<std::string> known = {
      "residual", "axioms",  "stability", "poincare", "cd",
      "bochner",  "grushin", "filiform",  "rigidity"};
  if (!cfg.has_geometry) errors.push_back("missing geometry section");

  for (const std::string& check : cfg.checks) {
    if (std::find(known.begin(), known.end(), check) == known.end()) {
      errors.push_back("unknown check '" + check + "'");
      continue;
    }
    const GeometryKind kind = cfg.geometry.kind;
    if (check == "bochner" && kind != GeometryKind::Heisenberg &&
        kind != GeometryKind::Engel && kind != GeometryKind::Filiform)
      errors.push_back("check 'bochner' needs a Carnot geometry "
                       "(heisenberg, engel or filiform)");
    if (check == "grushin" && kind != GeometryKind::Grushin)
      errors.push_back("check 'grushin' needs the grushin geometry");
    if (check == "filiform" &&
        (kind != GeometryKind::Filiform || cfg.geometry.dimension < 3))
      errors.push_back("check 'filiform' needs a filiform geometry with "
                       "dimension >= 3");
    if ((check == "residual" || check == "stability" || check == "poincare" ||
         check == "rigidity") &&
        cfg.u_expression.empty())
      errors.push_back("check '" + check + "' needs problem.u");
  }
  if (!cfg.has_grid) errors.push_back("missing grid section");
  return errors;
}

}  // namespace carre
