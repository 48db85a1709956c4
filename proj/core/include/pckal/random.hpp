#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pckal {

/// Mixes a base seed with a textual stream label into a 64-bit stream key.
std::uint64_t derive_key(std::uint64_t seed, std::string_view label) noexcept;

/// Counter-based random stream.
///
/// The i-th raw draw is a pure function of (key, i): SplitMix64's finalizer applied to
/// key + (i + 1) * golden-gamma. Two streams with different (seed, label) pairs never
/// share state, and any draw can be reproduced from its counter alone.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view label) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller on consecutive uniform pairs.
  double normal() noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pckal
