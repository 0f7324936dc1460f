#pragma once

#include <iosfwd>

namespace kirchnet {

/// Exit status: 0 success, 1 domain failure (irregular network, failed
/// verification, solver error), 2 I/O, parse or usage failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kirchnet
