#pragma once

#include <string>
#include <vector>

namespace tunesel {

// Command-line front end. Returns 0 on success, 2 on a usage error, 1 on a
// runtime error (diagnostic written to stderr). Identical arguments and
// seeds produce byte-identical output files.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args); // args without program name

} // namespace tunesel
