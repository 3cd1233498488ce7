#pragma once

#include <charconv>
#include <filesystem>
#include <string>

namespace subtrack {

// Shortest round-trip decimal representation; stable across runs.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

// Writes content to path via a sibling temp file + rename, so interrupted
// runs never leave truncated artifacts.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace subtrack
