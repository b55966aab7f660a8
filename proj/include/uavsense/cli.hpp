#pragma once

#include <string>
#include <vector>

namespace uavsense {

/// Command-line front end. Exit codes: 0 success, 1 config/usage error,
/// 2 infeasible problem instance.
int runCli(const std::vector<std::string>& args);

}  // namespace uavsense
