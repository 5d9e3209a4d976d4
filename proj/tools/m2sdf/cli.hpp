#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace m2sdf::cli {

/// Entry point shared by the executable and the tests. Returns 0 on success,
/// 2 on usage or config errors and 1 on runtime failures; diagnostics go to
/// `err` only.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace m2sdf::cli
