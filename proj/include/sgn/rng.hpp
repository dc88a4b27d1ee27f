#pragma once

#include <cstdint>

// Deterministic, counter-addressable random streams.
//
// Every stream is identified by an RngSeed {master_seed, stream_id}. The pair
// is hashed into a 64-bit key and the k-th draw of the stream is a pure
// function of (key, k):
//
//   key     = mix64(mix64(master_seed ^ GOLDEN) + stream_id)
//   bits(k) = mix64(key + (k + 1) * GOLDEN)
//
// where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the SplitMix64 finalizer
// (Steele, Lea, Flood 2014). uniform(k) maps bits(k) to the open interval
// (0,1) as ((bits >> 11) + 0.5) * 2^-53; normal(k) applies the AS241
// (Wichura 1988, PPND16) inverse normal CDF to uniform(k). There is no
// sequential state anywhere, so any draw can be regenerated in O(1) and the
// same seed yields bit-identical values on every platform with IEEE doubles
// (the build pins -ffp-contract=off for this translation unit).
//
// Child streams are derived by re-seeding: child(seed, j) has
// master = key(seed) and stream_id = j. Derivation nests without collisions
// between the key space and counter space in any path we use.

namespace sgn {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct RngSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

constexpr std::uint64_t stream_key(RngSeed seed) noexcept {
  return mix64(mix64(seed.master_seed ^ kGolden) + seed.stream_id);
}

constexpr RngSeed child_seed(RngSeed seed, std::uint64_t substream) noexcept {
  return RngSeed{stream_key(seed), substream};
}

// Inverse of the standard normal CDF, algorithm AS241 (PPND16).
// Accurate to about 1e-16 relative on (0,1); u must lie strictly inside.
double normal_icdf(double u);

class CounterRng {
 public:
  CounterRng() : key_(stream_key(RngSeed{})) {}
  explicit CounterRng(RngSeed seed) : key_(stream_key(seed)) {}

  std::uint64_t bits(std::uint64_t k) const noexcept {
    return mix64(key_ + (k + 1) * kGolden);
  }

  // Uniform on the open interval (0,1).
  double uniform(std::uint64_t k) const noexcept {
    return (static_cast<double>(bits(k) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t k) const { return normal_icdf(uniform(k)); }

  // Laplace with scale b (density exp(-|t|/b)/(2b)).
  double laplace(std::uint64_t k, double b) const;

  // Integer in [0, bound) via the fixed-point multiply reduction.
  std::uint64_t below(std::uint64_t k, std::uint64_t bound) const noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

// Convenience wrapper that walks a stream sequentially.
class SeqRng {
 public:
  explicit SeqRng(RngSeed seed) : rng_(seed) {}
  double uniform() { return rng_.uniform(next_++); }
  double normal() { return rng_.normal(next_++); }
  double laplace(double b) { return rng_.laplace(next_++, b); }
  std::uint64_t below(std::uint64_t bound) { return rng_.below(next_++, bound); }
  // Standard normal, redrawn in the vanishingly unlikely case of exact 0.
  double normal_nonzero() {
    double v = normal();
    while (v == 0.0) v = normal();
    return v;
  }

 private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

}  // namespace sgn
