#pragma once

namespace carots::cli {

/// Parses the command line and runs one subcommand. Returns the process exit
/// code: 0 success, 2 configuration or input error, 3 numerical failure,
/// 1 anything else.
int run(int argc, char** argv);

}  // namespace carots::cli
