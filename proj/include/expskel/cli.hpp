#pragma once

#include <string>
#include <vector>

namespace expskel {

// Entry point behind the expskel binary.  Exit codes: 0 success, 1 input
// error (malformed JSON reports line/column), 2 verification failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace expskel
