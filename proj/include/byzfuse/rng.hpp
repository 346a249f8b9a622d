#pragma once

#include <cstdint>
#include <limits>

namespace byzfuse {

/// 64-bit finalizer from SplitMix64. Used both as the seed hash and as the
/// output function of the counter generator.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x9e3779b97f4a7c15ULL));
}

/// Sub-seed of trial `t` (optionally of a named stream) under a master seed.
constexpr std::uint64_t sub_seed(std::uint64_t master, std::uint64_t t, std::uint64_t stream = 0) noexcept {
  return hash_combine(hash_combine(master, stream), t);
}

/// Counter-based generator: the k-th output is mix64(key + k * gamma).
/// Any (key, counter) pair can be reproduced without replaying the stream,
/// and split() derives an independent child key.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key = 0) noexcept : key_(mix64(key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform double in [0,1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform integer in [0, n). n must be positive. Lemire's method without the
  // rejection step; bias is < n / 2^64 which is irrelevant here.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  constexpr CounterRng split(std::uint64_t stream) const noexcept {
    CounterRng child;
    child.key_ = hash_combine(key_, stream);
    return child;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace byzfuse
