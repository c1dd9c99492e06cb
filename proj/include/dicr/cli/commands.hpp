#pragma once

#include <atomic>
#include <iosfwd>

namespace dicr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInterrupted = 130;

// Entry point of the `dicr` tool.  `stop` is polled by training stages.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop = nullptr);

}  // namespace dicr::cli
