#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace metainv {

/// Incremental 64-bit FNV-1a. Used for content digests of configs and
/// datasets; not a security primitive.
class Fnv1a64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001B3ULL;
    }
  }

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

/// "fnv1a64:<16 lowercase hex digits>"
std::string content_digest(std::string_view bytes);

}  // namespace metainv
