#pragma once

#include <cstdint>

#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::spin {

enum class CoefficientLaw { gaussian, exponential };

/// Random Hamiltonian with every term of size 1..max_degree present with
/// probability `density`. Coefficients are scale * N(0,1), or scale * Exp(1)
/// with a uniformly random sign.
struct RandomHamiltonianOptions {
  int n = 4;
  int max_degree = 2;
  CoefficientLaw law = CoefficientLaw::gaussian;
  double scale = 0.2;
  double density = 1.0;
};

SpinHamiltonian random_hamiltonian(const RandomHamiltonianOptions& opts, std::uint64_t seed);

/// Symmetric zero-diagonal coupling with N(0, scale^2) entries.
Matrix random_coupling(int n, double scale, std::uint64_t seed);

}  // namespace glauberlab::spin
