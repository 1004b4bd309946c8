#pragma once

#include <string>
#include <vector>

#include "carre/config.hpp"

namespace carre {

struct RunOutcome {
  /// 0 all verdicts hold; 1 configuration error; 2 a genuine violation;
  /// 3 hypothesis-gate warnings only.  Reports are written for every check
  /// that ran, whatever the status.
  int exit_code = 0;
  std::vector<std::string> written_files;
  std::vector<std::string> summary;   // one line per check
  std::vector<std::string> errors;    // configuration problems
};

RunOutcome run_checks(const RunConfig& config);

}  // namespace carre
