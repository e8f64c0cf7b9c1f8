#pragma once

// Command line front end: verify, closure, generate, evaluate, feedback.
//
// Exit codes: 0 success (verify: derivable), 1 verify found no derivation,
// 2 bad input (parse, schema, IO or usage errors).

#include <iosfwd>
#include <string>
#include <vector>

namespace dover {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotDerivable = 1;
inline constexpr int kExitInputError = 2;

// Environment variable naming a default config file (INI/TOML, one section
// per subcommand).
inline constexpr const char* kConfigEnv = "DOVER_CONFIG";

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for tests: args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dover
