#pragma once

#include <ostream>

namespace phototopic::cli {

// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kValidation = 2;  // also parse errors and bad arguments
inline constexpr int kIo = 3;          // also transport errors
inline constexpr int kNumeric = 4;

// Runs one `phototopic` invocation in-process. Results that have no --out
// file go to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phototopic::cli
