#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace omlab {

/// Exit codes: 0 success or pass, 1 failed assertion, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace omlab
