#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fssam {

/// Exit codes: 0 success, 1 usage error, 2 runtime failure.
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fssam
