#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gapcount::cli {

/// Exit status: 0 success, 1 verification failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace gapcount::cli
