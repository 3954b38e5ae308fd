#pragma once

#include <iosfwd>

namespace fearcorr {

// Entry point of the command-line tool. Returns the process exit code:
// 0 success, 2 validation error, 3 data or I/O error, 4 insufficient
// statistics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fearcorr
