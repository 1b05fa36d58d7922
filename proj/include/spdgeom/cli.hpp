#pragma once

// Command-line front end. Exit codes: 0 success, 2 validation error (stderr
// line starting "ERROR <Kind>:"), 1 internal failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace spdgeom::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spdgeom::cli
