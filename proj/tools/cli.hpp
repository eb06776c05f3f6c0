#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace radloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad arguments or malformed configuration
inline constexpr int kExitFailure = 2;  // I/O, missing inputs, runtime errors

/// Entry point of the `radloc` tool: simulate | localize | evaluate | demo.
/// Messages go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace radloc::cli
