#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dirsteer::cli {

// argv without the program name. Returns the process exit code:
// 0 ok, 1 usage or validation error, 2 I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dirsteer::cli
