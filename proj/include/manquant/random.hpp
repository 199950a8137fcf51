#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace manquant {

struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer. Used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for a tagged sub-stream: folds each tag into the base with
/// mix64(acc ^ mix64(tag + golden)). Used for restart seeds and grid cells.
RngSeed derive_seed(RngSeed base, std::initializer_list<std::uint64_t> tags);

/// Seedable random stream with a fully specified output sequence.
///
/// Raw bits come from std::mt19937_64 (bit-exact across standard libraries).
/// The conversions below are implemented here rather than taken from
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform01: top 53 bits of one draw times 2^-53, in [0, 1).
///   normal:    Box-Muller on two uniform01 draws u1, u2 with u1 mapped to
///              (0, 1] as 1 - u1; yields sqrt(-2 ln u1) cos(2 pi u2) and caches
///              the sin branch for the next call.
///   index(n):  rejection sampling on the raw 64-bit draw (unbiased).
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double normal();
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace manquant
