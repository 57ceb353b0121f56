#pragma once

#include <iosfwd>

namespace mmobs::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kNotCertified = 2;
inline constexpr int kViolation = 3;
inline constexpr int kNumericFailure = 4;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmobs::cli
