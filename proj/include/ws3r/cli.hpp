#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ws3r {

// Full command-line front end (classify | analyze | sweep | validate), shared
// by the binary and the tests.  args excludes the program name.  Returns the
// process exit code: 0 success, 1 property/consistency failure, 2 input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ws3r
