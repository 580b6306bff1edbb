#pragma once

#include <iostream>

namespace viralens::cli {

/// Runs the command line. Returns 0 on success, 1 on bad input, 2 on I/O failure.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace viralens::cli
