#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uavflow {

/// Exit codes: 0 success, 1 infeasible or failed run, 2 bad configuration or
/// usage. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uavflow
