#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mfchain {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the independent stream used by path `index` of a batch.
/// Depends only on (master, index), so batches give the same paths whatever
/// the thread count.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9E3779B97F4A7C15ULL));
}

/// Counter-based generator: output n is mix64(seed + n * golden).
/// Uniform and exponential conversions are done here rather than through
/// <random> distributions so that streams are bit-identical across
/// standard libraries.
class PathRng {
 public:
  using result_type = std::uint64_t;

  explicit PathRng(std::uint64_t seed) noexcept : counter_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix64(counter_);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential waiting time with the given rate; +inf for rate 0.
  double exponential(double rate) noexcept {
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_open()) / rate;
  }

 private:
  std::uint64_t counter_;
};

}  // namespace mfchain
