#pragma once

#include <iosfwd>

namespace hgc {

// Runs the `hgc` command line. Returns 0 on success, 1 on invalid input and
// 2 on any other failure. Diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hgc
