#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

namespace gslift {

// splitmix64 step; used for seed derivation and hashing.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

inline uint64_t hash_bytes(const void* p, size_t n, uint64_t seed = 0xcbf29ce484222325ull) {
  const unsigned char* b = static_cast<const unsigned char*>(p);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic random stream. Distribution code is hand-rolled so results
// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(mix64(seed)) {}

  uint64_t next_u64() { return eng_(); }

  // [0,1) with 53 random bits.
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range, rejection sampling to avoid modulo bias.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return lo + static_cast<int64_t>(r % span);
  }

  // Box-Muller; spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Independent derived stream; forking does not disturb this stream.
  Rng fork(uint64_t stream_id) const {
    return Rng(hash_combine(base_state_hash(), stream_id));
  }

 private:
  uint64_t base_state_hash() const {
    // Hash of the engine state is overkill; hash the original seed material
    // instead by keeping a copy of the first output of a cloned engine.
    std::mt19937_64 copy = eng_;
    return copy();
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gslift
