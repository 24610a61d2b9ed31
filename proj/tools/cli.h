#ifndef COREFDEC_TOOLS_CLI_H_
#define COREFDEC_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace corefdec {

// Exit statuses of the corefdec executable.
enum ExitStatus {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

// Runs one corefdec invocation. `args` excludes the program name. Results
// that go to standard output are written to `out`, diagnostics to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace corefdec

#endif  // COREFDEC_TOOLS_CLI_H_
