#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnet::cli {

enum ExitCode : int {
  ok = 0,
  usage = 1,
  data_error = 2,
  growth_failure = 3,
};

/// Runs the `pnet` command line. Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pnet::cli
