#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace malrag {

/// `malrag index|query|eval|stats`. Returns the process exit code; stage
/// failures map to distinct codes (parse=2, summarize=3, embed=4, retrieve=5,
/// generate=6, evaluate=7).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace malrag
