#pragma once

// Subcommands of the `mplab` experiment runner. Kept in the library so the
// tests drive exactly the code the executable runs.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mplab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCertificateFailure = 2;

struct Options {
  std::string command;  // solve | shadow | polarize | rearrange | check
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> halfspace;
  std::optional<std::string> input;
};

/// Runs one subcommand. A JSON summary goes to `out`; on failure a
/// {"error": {...}} object goes to `err` and the exit code is nonzero.
int run(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace mplab::cli
