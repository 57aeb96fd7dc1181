#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace guided::cli {

// Exit codes: 0 success, 1 negative verdict, 2 usage or config error, 3 numeric failure.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace guided::cli
