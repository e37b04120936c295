#pragma once

#include <exception>
#include <ostream>

namespace tgcli {

/// Runs one command line. Results go to `out`, diagnostics to `err`.
/// Returns 0 on success, 2 for configuration errors, 3 for numerical failures and
/// 4 for internal invariant violations.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

}  // namespace tgcli
