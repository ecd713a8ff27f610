#ifndef SWRM_TOOLS_CLI_H_
#define SWRM_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace swrm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swrm::cli

#endif  // SWRM_TOOLS_CLI_H_
