#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

namespace glauberlab {

/// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Folds a sequence of words into a single 64-bit key.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto w : words) h = mix64(h ^ mix64(w + kGolden));
  return h;
}

inline std::uint64_t hash_words(std::uint64_t head, std::span<const int> tail) noexcept {
  std::uint64_t h = mix64(head + kGolden);
  for (int w : tail) h = mix64(h ^ mix64(static_cast<std::uint64_t>(w) + kGolden));
  return h;
}

/// 53-bit uniform in [0, 1).
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// 53-bit uniform in (0, 1].
constexpr double to_unit_open0(std::uint64_t x) noexcept {
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal from two independent words (Box-Muller, cosine branch).
inline double normal_from_words(std::uint64_t a, std::uint64_t b) noexcept {
  const double u1 = to_unit_open0(a);
  const double u2 = to_unit(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Counter-based generator: the i-th draw of stream (seed, stream) is a pure
/// function of (seed, stream, i), so streams can be advanced or replayed
/// independently of scheduling. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0) noexcept
      : key_(hash_words({seed, stream})), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return at(counter_++); }

  /// Draw at an absolute counter position without advancing.
  result_type at(std::uint64_t counter) const noexcept { return mix64(key_ + counter * kGolden); }

  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept { counter_ = counter; }

  double uniform() noexcept { return to_unit((*this)()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() noexcept {
    const auto a = (*this)();
    const auto b = (*this)();
    return normal_from_words(a, b);
  }

  double exponential() noexcept { return -std::log(to_unit_open0((*this)())); }

  /// Uniform integer in [0, bound) by multiply-shift; bias is below 2^-64 * bound.
  std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using Wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<Wide>((*this)()) * bound) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace glauberlab
