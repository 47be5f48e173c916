#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace neurodyn::cli {

// Process exit codes. Each outcome category maps to exactly one code.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,     // I/O or invalid input data
    kNotSettled = 2,  // divergence, no plateau, or failed experiment expectation
    kDae = 3,         // singular mass matrix
    kUsage = 64,
};

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace neurodyn::cli
