#pragma once

#include <cstdint>
#include <random>

namespace cyclofrag {

// One splitmix64 step; used for seed mixing only, never as the main generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// All per-stage and per-replicate seeds derive from one master seed through
// this function, so results are independent of worker count and scheduling.
// `stream` names the pipeline stage, `index` the replicate / design row.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(master ^ (0xA0761D6478BD642FULL * (stream + 1)));
  return splitmix64(s ^ (0xE7037ED1A0B428DBULL * (index + 1)));
}

// Seeded generator with portable output. The standard distributions are
// implementation-defined, so uniform doubles and bounded integers are drawn
// directly from the raw 64-bit stream here; identical seeds give identical
// sequences on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double strictly inside (0,1): 53-bit mantissa offset by half an ulp,
  // so 0.0 and 1.0 are unreachable.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via rejection of the short final stripe.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cyclofrag
