// carre: batch front-end for the carre-du-champ certification library.
// Reads a declarative config, builds the geometry and problem instance,
// runs the requested checks and writes JSON (and optional CSV) reports.
//
// Exit codes: 0 every verdict holds, 1 configuration error, 2 a genuine
// violation was found, 3 hypothesis-gate warnings only.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "carre/config.hpp"
#include "carre/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical carre-du-champ calculus and certification"};

  std::string config_path;
  std::string out_dir;
  int threads = -1;
  long seed = -1;
  std::vector<std::string> checks;
  bool csv = false;

  app.add_option("--config", config_path, "path to the run config")
      ->required();
  app.add_option("--out", out_dir, "report output directory");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--seed", seed, "sampling seed (overrides config)");
  app.add_option("--check", checks,
                 "check to run (repeatable, overrides the config list)");
  app.add_flag("--csv", csv, "also write per-point CSV tables");

  CLI11_PARSE(app, argc, argv);

  carre::ConfigResult parsed = carre::load_config(config_path);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      std::fprintf(stderr, "%s:%d:%d: %s\n", config_path.c_str(), d.line,
                   d.column, d.message.c_str());
    return 1;
  }
  carre::RunConfig config = std::move(*parsed.config);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (threads >= 0) config.threads = threads;
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
  if (!checks.empty()) config.checks = checks;
  if (csv) config.csv = true;

  carre::RunOutcome outcome = carre::run_checks(config);
  for (const auto& err : outcome.errors)
    std::fprintf(stderr, "error: %s\n", err.c_str());
  for (const auto& line : outcome.summary)
    std::printf("%s\n", line.c_str());
  for (const auto& file : outcome.written_files)
    std::printf("wrote %s\n", file.c_str());
  return outcome.exit_code;
}
