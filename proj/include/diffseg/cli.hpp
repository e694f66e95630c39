#pragma once

#include <string>
#include <vector>

namespace diffseg {

/// Runs one CLI invocation. Exit codes: 0 success, 1 usage error, 2 data or
/// runtime error.
int cli_dispatch(int argc, const char* const* argv);

/// Convenience overload; args exclude the program name.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace diffseg
