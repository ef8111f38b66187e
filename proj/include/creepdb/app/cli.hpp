#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace creepdb::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDocumentFailure = 1;
inline constexpr int kExitFatal = 2;
inline constexpr int kExitUsage = 64;

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics to `err`. Returns the process exit status.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_run(const std::vector<std::string>& args);

}  // namespace creepdb::app
