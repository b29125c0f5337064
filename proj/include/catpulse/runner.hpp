#pragma once

#include <ostream>
#include <string>

#include "catpulse/config.hpp"

namespace catpulse {

// Execute the configured experiment and write its artifacts (record.json plus
// experiment-specific CSVs) into out_dir. Progress goes to log. Returns the
// process exit code: 0 on success, 3 on a numerical failure.
int run_experiment(const RunConfig& cfg, const std::string& out_dir,
                   int threads, std::ostream& log);

// Static checks only: parameter validation already happened at parse time, so
// this prints the physics warnings and a short analytic summary.
int validate_config(const RunConfig& cfg, std::ostream& log);

}  // namespace catpulse
