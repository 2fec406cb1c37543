#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand (train, encode, eval-knn, compare, info). `args`
// excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddl::cli
