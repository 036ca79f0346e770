#pragma once

#include <iosfwd>

namespace fbmlab {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 verification failure, 2 usage or config error,
// 3 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbmlab
