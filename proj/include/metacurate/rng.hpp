#pragma once

#include <cstdint>
#include <string_view>

namespace metacurate::rng {

// 64-bit finalizer from splitmix64. Full avalanche; the backbone of all
// keyed draws below.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline double to_unit_double(std::uint64_t bits) {
  // 53 high bits -> [0, 1). Never returns 1.0, so a probability-1 entry
  // fires on every draw.
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based draw keyed by (seed, record uid, entry id). Stateless:
// the same key always yields the same variate, independent of sharding,
// worker count, or evaluation order.
inline double keyed_uniform(std::uint64_t seed, std::string_view uid,
                            std::uint64_t entry_id) {
  std::uint64_t h = mix64(seed ^ fnv1a64(uid));
  h = mix64(h ^ (entry_id * 0xD1342543DE82EF95ULL));
  return to_unit_double(h);
}

inline std::uint64_t derive_epoch_seed(std::uint64_t master_seed,
                                       std::uint64_t epoch_index) {
  return mix64(master_seed ^ mix64(epoch_index ^ 0xA0761D6478BD642FULL));
}

// Small sequential generator for places that need a stream rather than a
// keyed draw (synthetic data, shuffle buffers). splitmix64 core.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double next_double() { return to_unit_double(next_u64()); }

  // Unbiased bounded integer in [0, n) via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace metacurate::rng
