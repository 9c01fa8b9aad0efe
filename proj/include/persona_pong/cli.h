#ifndef PERSONA_PONG_CLI_H_
#define PERSONA_PONG_CLI_H_

#include <ostream>

namespace persona_pong {

// Entry point of the persona_pong tool. Returns the process exit code:
// 0 success, 1 usage error, 2 invalid config, 3 checkpoint
// incompatibility, 4 numerical divergence.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace persona_pong

#endif  // PERSONA_PONG_CLI_H_
