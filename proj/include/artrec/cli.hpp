#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace artrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBackend = 2;

/// Entry point for the `artrec` command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace artrec::cli
