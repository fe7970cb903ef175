#pragma once

#include <string>

#include "bhv/config.hpp"

namespace bhv {

// Exit codes: 0 all checks passed, 1 at least one check failed or was
// indeterminate, 2 configuration or expression error, 3 numeric or domain
// error (region exhausted, singular evaluation).
struct RunOutcome {
  int exit_code = 0;
  nlohmann::ordered_json report;
};

RunOutcome run_checks(const RunConfig& config);

// Expanded symbolic residual for the axis-aligned (m = 4) or slanted
// z-factor hyperplane equation; informational only.
std::string derive_text(const RunConfig& config);

}  // namespace bhv
