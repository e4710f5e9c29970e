#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

namespace teamrank {

// 64-bit streaming content digest (FNV-1a over 64-bit words, splitmix finalizer).
// Stable across platforms: doubles are fed by bit pattern.
class Digest {
 public:
  Digest& add(std::uint64_t word) noexcept {
    state_ = (state_ ^ word) * kPrime;
    return *this;
  }
  Digest& add(double value) noexcept { return add(std::bit_cast<std::uint64_t>(value)); }
  Digest& add(std::span<const double> values) noexcept {
    add(static_cast<std::uint64_t>(values.size()));
    for (double v : values) add(v);
    return *this;
  }
  Digest& add(std::string_view text) noexcept {
    add(static_cast<std::uint64_t>(text.size()));
    for (unsigned char ch : text) state_ = (state_ ^ ch) * kPrime;
    return *this;
  }

  std::uint64_t value() const noexcept {
    std::uint64_t z = state_ + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace teamrank
