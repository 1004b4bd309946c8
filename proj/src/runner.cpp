#include "carre/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "carre/expr.hpp"
#include "carre/parallel.hpp"
#include "carre/report.hpp"
#include "carre/verify.hpp"

namespace carre {

namespace {

enum class Status { Holds, Warning, Violation };

const char* status_name(Status s) {
  switch (s) {
    case Status::Holds: return "holds";
    case Status::Warning: return "warning";
    case Status::Violation: return "violation";
  }
  return "?";
}

struct CheckRun {
  std::string name;
  Status status = Status::Holds;
  Json body;
  PointTable table;
  std::string one_liner;
};

// merge per-sample identity reports, keeping the worst entry per slot
void merge_worst(IdentityReport& into, const IdentityReport& from) {
  if (into.entries.empty()) {
    into = from;
    return;
  }
  for (std::size_t i = 0;
       i < std::min(into.entries.size(), from.entries.size()); ++i) {
    if (from.entries[i].max_residual > into.entries[i].max_residual) {
      into.entries[i] = from.entries[i];
    }
    into.entries[i].pass = into.entries[i].pass && from.entries[i].pass;
  }
}

std::vector<int> basis_counts(const RunConfig& cfg, int dim) {
  const std::string raw = cfg.option("stability", "basis");
  std::vector<int> counts;
  if (!raw.empty()) {
    std::size_t start = 0;
    for (;;) {
      const std::size_t semi = raw.find(';', start);
      const std::string part =
          raw.substr(start, semi == std::string::npos ? semi : semi - start);
      counts.push_back(std::max(2, std::atoi(part.c_str())));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
  }
  if (counts.empty()) counts.push_back(dim == 1 ? 120 : 6);
  while (static_cast<int>(counts.size()) < dim) counts.push_back(counts[0]);
  counts.resize(dim);
  return counts;
}

}  // namespace

RunOutcome run_checks(const RunConfig& cfg) {
  RunOutcome outcome;
  set_thread_count(cfg.threads);

  outcome.errors = validate_config(cfg);
  if (!outcome.errors.empty()) {
    outcome.exit_code = 1;
    return outcome;
  }

  MarkovTriple T;
  try {
    T = make_geometry(cfg.geometry);
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string("geometry: ") + e.what());
    outcome.exit_code = 1;
    return outcome;
  }
  const int n = T.dim();

  if (cfg.box.dim() != n) {
    outcome.errors.push_back("grid box dimension " +
                             std::to_string(cfg.box.dim()) +
                             " does not match geometry dimension " +
                             std::to_string(n));
    outcome.exit_code = 1;
    return outcome;
  }

  SmoothFunction u, F;
  if (!cfg.u_expression.empty()) {
    ParseResult r = parse(cfg.u_expression, n);
    if (!r.ok()) {
      for (const auto& d : r.diagnostics)
        outcome.errors.push_back("problem.u: " + d.message + " (offset " +
                                 std::to_string(d.offset) + ")");
      outcome.exit_code = 1;
      return outcome;
    }
    u = make_function(std::move(*r.ast), n, cfg.u_expression);
  }
  if (!cfg.F_expression.empty()) {
    ParseOptions opt;
    opt.s_is_x1 = true;
    ParseResult r = parse(cfg.F_expression, 1, opt);
    if (!r.ok()) {
      for (const auto& d : r.diagnostics)
        outcome.errors.push_back("problem.F: " + d.message + " (offset " +
                                 std::to_string(d.offset) + ")");
      outcome.exit_code = 1;
      return outcome;
    }
    F = make_function(std::move(*r.ast), 1, cfg.F_expression);
  }

  std::vector<int> nodes = cfg.nodes_per_axis;
  if (nodes.empty()) nodes.assign(n, 64);
  while (static_cast<int>(nodes.size()) < n) nodes.push_back(nodes[0]);
  nodes.resize(n);

  ProblemInstance instance;
  instance.triple = T;
  instance.u = u;
  instance.F = F;
  try {
    instance.grid = build_grid(cfg.box, nodes, cfg.rule);
    if (T.weighted()) instance.grid = instance.grid.with_weight(T.eta());
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string("grid: ") + e.what());
    outcome.exit_code = 1;
    return outcome;
  }

  const std::vector<Vector> points =
      halton_points(cfg.box, cfg.sample_points, cfg.seed);

  // sample polynomials, quadratic and cubic alternating
  auto sample_polynomials = [&](int count, std::uint64_t salt) {
    SplitMix64 rng(cfg.seed * 0x9e37u + salt);
    std::vector<SmoothFunction> fs;
    for (int i = 0; i < count; ++i)
      fs.push_back(random_polynomial(n, 2 + (i % 2), rng, 2.0)
                       .function("f" + std::to_string(i)));
    return fs;
  };

  // gates computed on demand and reused by the explicit checks
  std::optional<ResidualReport> residual_cache;
  std::optional<SpectrumReport> spectrum_cache;
  auto get_residual = [&]() -> const ResidualReport& {
    if (!residual_cache) {
      SplitMix64 rng(cfg.seed + 17);
      auto bumps = random_bumps(cfg.box, 8, rng);
      residual_cache = residual(instance, points, bumps);
    }
    return *residual_cache;
  };
  auto get_spectrum = [&]() -> const SpectrumReport& {
    if (!spectrum_cache) {
      const double tol = cfg.option_num("stability", "tol", 1e-6);
      const double rf = cfg.option_num("stability", "radius_factor", 3.0);
      auto basis = bump_lattice(cfg.box, basis_counts(cfg, n), rf);
      spectrum_cache = stability_spectrum(instance, basis, tol);
    }
    return *spectrum_cache;
  };

  std::vector<CheckRun> runs;
  auto run_check = [&](const std::string& name) {
    CheckRun run;
    run.name = name;

    if (name == "residual") {
      const double tol = cfg.option_num("residual", "tol", 1e-6);
      const ResidualReport& rep = get_residual();
      run.body = to_json(rep);
      const bool pass = rep.pointwise_sup <= tol && rep.weak_sup <= tol;
      run.body["tolerance"] = tol;
      run.body["verdict"] = pass ? "within tolerance" : "exceeds tolerance";
      run.status = pass ? Status::Holds : Status::Warning;
      run.one_liner = "pointwise sup " + std::to_string(rep.pointwise_sup);
    } else if (name == "axioms") {
      const double tol = cfg.option_num("axioms", "tol", 1e-7);
      AxiomSamples samples;
      SplitMix64 rng(cfg.seed + 29);
      const int fn_count = std::max(4, cfg.sample_functions);
      for (int i = 0; i < fn_count; ++i)
        samples.functions.push_back(
            random_polynomial(n, 3, rng, 1.0).function("f" + std::to_string(i)));
      samples.points = points;
      Bump bump;
      bump.center = 0.5 * (cfg.box.lower + cfg.box.upper);
      bump.radius = 0.4 * (cfg.box.upper - cfg.box.lower);
      bump.power = 4;
      bump.tensor = true;
      samples.compact_support.push_back(bump);
      IdentityReport rep = validate_axioms(T, samples, tol);
      run.body = to_json(rep);
      run.status = rep.all_pass() ? Status::Holds : Status::Violation;
      run.one_liner = "max residual " + std::to_string(rep.max_residual());
    } else if (name == "stability") {
      const SpectrumReport& rep = get_spectrum();
      run.body = to_json(rep);
      run.status = rep.stable ? Status::Holds : Status::Violation;
      run.one_liner =
          "lambda_min " + (rep.smallest_eigenvalues.empty()
                               ? std::string("?")
                               : std::to_string(rep.smallest_eigenvalues[0]));
    } else if (name == "poincare") {
      const double tol = cfg.option_num("poincare", "tol", 1e-4);
      const double eps = cfg.option_num("poincare", "epsilon", 0.0);
      const int bump_count =
          static_cast<int>(cfg.option_num("poincare", "bumps", 20));
      SplitMix64 rng(cfg.seed + 41);
      auto phis = random_bumps(cfg.box, bump_count, rng);
      InequalityReport rep = poincare_certificate(
          instance, phis, eps, tol, &get_residual(), &get_spectrum(),
          cfg.option_num("residual", "tol", 1e-6));
      run.body = to_json(rep);
      run.status = !rep.hypothesis_ok
                       ? Status::Warning
                       : (rep.holds ? Status::Holds : Status::Violation);
      run.one_liner = "worst margin " + std::to_string(rep.worst_margin);
    } else if (name == "cd") {
      const double K = cfg.option_num("cd", "K", 0.0);
      const double tol = cfg.option_num("cd", "tol", 1e-8);
      const int trials = static_cast<int>(
          cfg.option_num("cd", "trials", cfg.sample_functions));
      auto fs = sample_polynomials(trials, 101);
      InequalityReport rep = cd_check(T, K, fs, points, tol);
      run.body = to_json(rep);
      run.status = rep.holds ? Status::Holds : Status::Violation;
      run.one_liner = rep.holds ? "no violation found"
                                : "violating witness " + rep.witness_label;
      run.table = std::move(rep.table);
    } else if (name == "bochner" || name == "grushin" || name == "filiform") {
      const double tol = cfg.option_num(name, "tol",
                                        name == "grushin" ? 1e-8 : 1e-6);
      const int trials = static_cast<int>(
          cfg.option_num(name, "trials", u.valid() ? 1 : 25));
      std::vector<SmoothFunction> subjects;
      if (u.valid()) subjects.push_back(u);
      if (!u.valid() || trials > 1) {
        auto extra = sample_polynomials(trials, 211);
        subjects.insert(subjects.end(), extra.begin(), extra.end());
      }
      IdentityReport merged;
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        IdentityReport rep;
        if (name == "bochner") {
          rep = bochner_carnot_check(T, subjects[s], points, tol);
        } else if (name == "grushin") {
          const ResidualReport* gate =
              (u.valid() && F.valid() && s == 0) ? &get_residual() : nullptr;
          rep = grushin_gamma2_check(T, subjects[s],
                                     F.valid() ? &F : nullptr, points, tol,
                                     gate,
                                     cfg.option_num("residual", "tol", 1e-6));
        } else {
          const double floor = cfg.option_num("filiform", "floor", 1e-6);
          rep = filiform_levelset_check(T, subjects[s], points, tol, floor);
        }
        if (s == 0) run.table = rep.table;
        merge_worst(merged, rep);
      }
      run.body = to_json(merged);
      run.status = merged.all_pass() ? Status::Holds : Status::Violation;
      bool gated_skip = false;
      for (const auto& e : merged.entries)
        if (e.note.rfind("skipped:", 0) == 0) gated_skip = true;
      if (run.status == Status::Holds && gated_skip)
        run.status = Status::Warning;
      run.one_liner = "max residual " + std::to_string(merged.max_residual());
    } else if (name == "rigidity") {
      const double K = cfg.option_num("rigidity", "K", 0.0);
      RigidityReport rep = rigidity_report(instance, K, points);
      run.body = to_json(rep);
      run.status =
          rep.hypothesis_consistent ? Status::Holds : Status::Warning;
      run.one_liner =
          "gamma integral " + std::to_string(rep.gamma_integral);
    } else {
      throw std::invalid_argument("unknown check '" + name + "'");
    }
    runs.push_back(std::move(run));
  };

  bool check_failed = false;
  for (const std::string& name : cfg.checks) {
    try {
      run_check(name);
    } catch (const std::exception& e) {
      outcome.errors.push_back("check '" + name + "': " + e.what());
      check_failed = true;
      break;
    }
  }

  // write whatever completed, regardless of verdicts or later errors
  std::filesystem::create_directories(cfg.out_dir);
  bool any_violation = false, any_warning = false;
  for (const CheckRun& run : runs) {
    Json j;
    j["schema"] = "carre-report/1";
    j["check"] = run.name;
    j["seed"] = cfg.seed;
    j["geometry"] = geometry_json(T);
    j["status"] = status_name(run.status);
    j["report"] = run.body;
    const std::string path = cfg.out_dir + "/" + run.name + ".json";
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    outcome.written_files.push_back(path);
    if (cfg.csv && !run.table.points.empty()) {
      const std::string csv_path = cfg.out_dir + "/" + run.name + ".csv";
      std::ofstream csv(csv_path);
      write_csv(csv, run.table, run.name);
      outcome.written_files.push_back(csv_path);
    }
    outcome.summary.push_back(run.name + ": " + status_name(run.status) +
                              " (" + run.one_liner + ")");
    any_violation = any_violation || run.status == Status::Violation;
    any_warning = any_warning || run.status == Status::Warning;
  }

  outcome.exit_code =
      check_failed ? 1 : (any_violation ? 2 : (any_warning ? 3 : 0));
  return outcome;
}

}  // namespace carre
