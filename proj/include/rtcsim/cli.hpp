#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rtcsim::cli {

/// Process exit codes. Stable; scripts depend on them.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,     ///< bad flags, config or input data
  kRealtime = 3,  ///< delivery fell behind the wall clock
  kInvariant = 4, ///< a scheduler invariant tripped
  kIo = 5,        ///< file or socket failure
};

/// Entry point of the `rtcsim` tool. `args` excludes the program name.
int main (const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Reads RTCSIM_LOG (trace|debug|info|warn|error|off) and configures the
/// diagnostic logger on stderr. Defaults to warn.
void setup_logging ();

} // namespace rtcsim::cli
