#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace glauberlab {

using Mask = std::uint64_t;

inline int popcount(Mask m) noexcept { return std::popcount(m); }

/// Binomial coefficient as double (exact for the sizes used here).
double binomial(int n, int k) noexcept;

/// All k-subsets of an n-element ground set as bitmasks, increasing order.
std::vector<Mask> k_subsets(int n, int k);

/// All k-subsets of the elements of `within`, increasing order.
std::vector<Mask> k_subsets_of(Mask within, int k);

/// Element indices (0-based bit positions) of a mask, increasing.
std::vector<int> mask_elements(Mask m);

/// Next mask with the same popcount (Gosper's hack). Caller bounds the range.
inline Mask next_same_popcount(Mask v) noexcept {
  const Mask t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace glauberlab
