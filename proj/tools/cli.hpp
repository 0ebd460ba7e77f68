#pragma once

#include <iosfwd>

namespace hopfinf::cli {

/// Runs the command line tool. Returns 0 on success, 2 on a negative verdict, 1 on error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hopfinf::cli
