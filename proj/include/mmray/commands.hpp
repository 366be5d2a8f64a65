#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmray {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
    kExitSuccess = 0,
    kExitUnexpected = 1,  ///< internal failure (I/O errors, bugs)
    kExitInputError = 2,  ///< bad arguments, unreadable or invalid files, missing materials
    kExitNumerical = 3,   ///< no matchable measurement or a rank-zero calibration system
};

/// Runs one invocation; `args` excludes the program name. Human-readable
/// summaries go to `out`, diagnostics and warnings to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmray
