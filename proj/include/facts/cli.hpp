#pragma once

#include <string>
#include <vector>

namespace facts::cli {

/// Runs the command line; returns the process exit status
/// (0 success, 1 hard error, 2 configuration error).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace facts::cli
