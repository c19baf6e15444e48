#pragma once

#include <iosfwd>

namespace ransomlab::cli {

// Full command-line driver. Results go to `out`, diagnostics to `err`.
// Returns 0 on success, 1 on an operational error, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ransomlab::cli
