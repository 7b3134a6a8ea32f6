#pragma once

#include <cstdint>
#include <random>

namespace trajmc {

/// SplitMix64 finalizer; used to derive independent stream keys.
std::uint64_t mix64(std::uint64_t x);

/// Random stream keyed by (seed, stream, counter). Two streams with the same
/// key produce the same draws regardless of what other streams exist, which
/// makes chains reproducible under any scheduling.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace trajmc
