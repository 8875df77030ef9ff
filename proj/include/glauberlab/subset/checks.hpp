#pragma once

#include <span>
#include <string>

#include "glauberlab/exact/correlation.hpp"
#include "glauberlab/subset/distribution.hpp"

namespace glauberlab::subset {

/// Correlation matrix over the elements with positive marginal.
exact::CorrelationMatrix correlation_matrix_subset(const SubsetDistribution& mu);

/// alpha^2 D Psi - alpha D over the whole ground set, pruned rows zero.
Matrix flc_matrix_from_correlation(const SubsetDistribution& mu, double alpha);

struct LocalIdentityReport {
  double lambda2 = 0.0;
  double lambda_max = 0.0;
  int k = 0;
  double deviation = 0.0;
  bool ergodic = false;
  bool pass = false;
};

/// Compares k * lambda_2 of the 1 <-> k up-down walk with lambda_max(Psi).
LocalIdentityReport si_local_identity_check(const SubsetDistribution& mu, double tolerance = 1e-9);

/// (1 - 2/k) lambda / (1 - lambda); requires k >= 3 and lambda < 1.
double trickledown_bound(double lambda, int k);

struct OppenheimReport {
  bool applicable = false;
  std::string reason;
  double lambda2 = 0.0;
  double link_lambda = 0.0;
  double bound = 0.0;
  bool pass = true;
};

OppenheimReport oppenheim_verify(const SubsetDistribution& mu, double tolerance = 1e-9);

/// C (k - 1 - C) / (k - 2C); requires k >= 3 and k > 2C.
double continuity_bound(double c, int k);

struct ContinuityReport {
  bool applicable = false;
  std::string reason;
  double link_constant = 0.0;
  double c_double_prime = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool pass = true;
};

/// C is the worst 1/((k-1) gap) over links at single elements, gap taken of
/// the link's (k-1) <-> (k-2) down-up walk. Asserts the k <-> k-1 gap is at
/// least 1/(C'' k).
ContinuityReport continuity_verify(const SubsetDistribution& mu, double tolerance = 1e-9);

struct SpectralIndependenceReport {
  double lambda_max = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// lambda_max(Psi) <= 1/(k gap) with gap of the k <-> k-1 down-up walk.
SpectralIndependenceReport poincare_to_si_check(const SubsetDistribution& mu, double tolerance = 1e-9);

struct VarianceReport {
  double variance = 0.0;
  double second_moment = 0.0;
  double constant = 0.0;
  bool pass = false;
};

/// Var(sum_{i in S} v_i) <= C E[sum_{i in S} v_i^2] with C = 1/(k gap).
VarianceReport variance_contraction_check(const SubsetDistribution& mu, std::span<const double> v,
                                          double tolerance = 1e-9);

}  // namespace glauberlab::subset
