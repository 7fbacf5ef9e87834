#ifndef NETSCAT_CLI_HPP
#define NETSCAT_CLI_HPP

#include <iosfwd>

namespace netscat {

enum ExitCode : int {
  kExitOk = 0,
  kExitNumerical = 1,  // numerical or I/O failure
  kExitUsage = 2,      // flag/config validation failure
};

// Entry point of the `netscat` command-line tool. Subcommands: spectrum,
// dwell, doublet, ensemble, density.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netscat

#endif  // NETSCAT_CLI_HPP
