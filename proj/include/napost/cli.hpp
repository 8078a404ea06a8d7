#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace napost {

// Parse and execute one command; args excludes the program name. Returns 0
// on success, 2 when the request is rejected (usage, configuration, or
// mesh/grid setup), 1 when the computation itself fails.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace napost
