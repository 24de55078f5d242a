#pragma once

#include <string>
#include <vector>

namespace esn::cli {

enum ExitCode { ok = 0, usage_error = 1, data_error = 2, numerical_error = 3 };

/// Parses argv (program name first) and runs one subcommand. Never throws.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

} // namespace esn::cli
