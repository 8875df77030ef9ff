#pragma once

#include <span>
#include <vector>

#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::exact {

/// Probability vector over all 2^n corners in corner-index order.
struct ExactGibbsTable {
  int n = 0;
  std::vector<double> probs;
  std::vector<double> log_probs;
  double log_Z = 0.0;

  std::size_t size() const noexcept { return probs.size(); }
  bool full_support() const noexcept;
  double min_prob() const noexcept;
};

/// mu(s) proportional to exp(H(s)); n <= 20.
ExactGibbsTable gibbs_table(const spin::SpinHamiltonian& h);

/// Normalizes log-weights (entries may be -infinity for zero mass).
ExactGibbsTable table_from_log_weights(int n, std::vector<double> log_weights);

/// Multiplies the weight of every corner by the product of lambda_i over the
/// sites with spin +1, then renormalizes.
ExactGibbsTable tilt(const ExactGibbsTable& table, std::span<const double> lambda);

/// Product measure with P[s_i = +1] = p_plus[i].
ExactGibbsTable product_table(std::span<const double> p_plus);

}  // namespace glauberlab::exact
