#pragma once

#include <cstdint>
#include <random>

namespace tumorboard::rng {

// splitmix64; used to derive independent per-replicate seeds from a master
// seed so parallel resampling stays reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

// Tiny portable generator used wherever byte-identical output across
// platforms matters (std::uniform_int_distribution is not portable).
struct Prng {
  std::uint64_t state;

  explicit Prng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace tumorboard::rng
