#pragma once

#include <string>

#include "semiflow/config.hpp"
#include "semiflow/report.hpp"

namespace semiflow::cli {

/// Runs the named experiment with the given configuration, writing the
/// report and CSV artifacts under out_dir. Returns the filled report.
Report run_experiment(const std::string& name, const Config& cfg, const std::string& out_dir);

bool known_experiment(const std::string& name);
std::string experiment_list();

}  // namespace semiflow::cli
