#pragma once

#include <cstdint>

#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::spin {

enum class SmoothnessMethod { exhaustive, sampled_lower_bound };

struct SmoothnessReport {
  double beta = 0.0;
  Spins argmax_corner;
  SmoothnessMethod method = SmoothnessMethod::exhaustive;
};

/// Max over corners of the Hessian operator norm. Exhaustive mode needs
/// n <= 20 active sites; only sites in terms of degree >= 3 are enumerated
/// since the Hessian does not depend on the others.
SmoothnessReport smoothness_beta_exhaustive(const SpinHamiltonian& h);

/// Random corners followed by greedy single-flip ascent. Lower bound.
SmoothnessReport smoothness_beta_sampled(const SpinHamiltonian& h, int restarts = 50,
                                         std::uint64_t seed = 1);

/// Sup over disjoint (pinned, zeroed) site sets, pinned spins and free
/// corners of the pinned Hessian's operator norm. Exhaustive over all 5^n
/// site labellings; n <= 12.
double t_constant(const SpinHamiltonian& h);

const char* to_string(SmoothnessMethod m) noexcept;

}  // namespace glauberlab::spin
