#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qos {

// Entry point of the qospred tool. Returns the process exit code: 0 on
// success, 1 on a pipeline failure, 2 on bad input or configuration.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qos
