#include "trajmc/rng.hpp"

namespace trajmc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

KeyedRng::KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t k1 = mix64(seed);
  const std::uint64_t k2 = mix64(k1 ^ mix64(stream));
  const std::uint64_t k3 = mix64(k2 ^ mix64(counter ^ 0x5851f42d4c957f2dULL));
  std::seed_seq seq{static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32),
                    static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32),
                    static_cast<std::uint32_t>(k3), static_cast<std::uint32_t>(k3 >> 32)};
  engine_.seed(seq);
}

}  // namespace trajmc
