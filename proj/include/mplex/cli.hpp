#ifndef MPLEX_CLI_HPP
#define MPLEX_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mplex {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the command line tool.
enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_validation = 2 };

// Runs one command line (without the program name). Progress and results go
// to `out`; failures are written to `err` as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace mplex

#endif  // MPLEX_CLI_HPP
