#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ragmem::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;   // bad flags, unreadable or invalid input
inline constexpr int kExitDomain = 3;  // valid input the engine cannot serve (k too large, ...)

/// Runs `ragmem <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ragmem::cli
