#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitSchemaError = 2;
inline constexpr int kExitConfigError = 3;

/// Entry point of the `tad` command line tool. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tad
