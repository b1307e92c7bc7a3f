#pragma once

#include <cstdint>
#include <random>

namespace seqcd {

/**
 * Seeded generator used by every sampler in the library.
 *
 * Engine: std::mt19937_64 (output fully specified by the standard, so streams
 * are identical across platforms and standard libraries). Doubles are built
 * from the top 53 bits, never through std::uniform_real_distribution, whose
 * output is implementation defined.
 *
 * Stream splitting: substream i of master seed s is seeded with
 * splitmix64(s ^ splitmix64(i + 1)). Trials, warm-up draws and auxiliary
 * streams each take their own index.
 */
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/splitmix64-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

inline Rng substream(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

}  // namespace seqcd
