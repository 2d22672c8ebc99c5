#pragma once

#include <string>
#include <vector>

namespace rio {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// `simulate`, `run` and `eval`. Messages go to stderr, results to files.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace rio
