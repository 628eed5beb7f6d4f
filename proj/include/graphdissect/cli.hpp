#pragma once

#include <string>
#include <vector>

namespace graphdissect::cli {

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 internal error, 2 usage/input error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace graphdissect::cli
