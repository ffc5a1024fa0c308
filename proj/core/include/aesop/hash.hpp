#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace aesop {

/// 64-bit FNV-1a, used for checksums and config fingerprints.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view text);
  void update(std::span<const double> values);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ull;
};

std::uint64_t fnv1a(std::string_view text);
std::string to_hex(std::uint64_t value);
/// Checksum of a file's bytes as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace aesop
