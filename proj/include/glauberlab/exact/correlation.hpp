#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "glauberlab/common/linalg.hpp"
#include "glauberlab/exact/gibbs.hpp"

namespace glauberlab::exact {

/// Correlation (influence) matrix. Row a conditions on element a:
/// entry (a,b) = P[b | a] - P[b], diagonal 1 - P[a].
struct CorrelationMatrix {
  Matrix entries;
  double lambda_max = 0.0;
  /// Ground elements (0-based) indexing the rows; pruned elements omitted.
  std::vector<int> elements;
  std::vector<int> pruned;
};

/// Builds the matrix from single marginals and the pairwise inclusion matrix
/// of a distribution over sets. Elements with zero marginal are pruned.
/// lambda_max comes from the symmetric form D^{-1/2} Cov D^{-1/2}.
CorrelationMatrix correlation_from_moments(const Vector& marginals, const Matrix& pair_marginals);

/// Ground element (i, +) is row 2i, (i, -) is row 2i+1 (0-based site i).
Matrix spin_pair_marginals(const ExactGibbsTable& table, Vector& marginals);

/// 2n x 2n matrix over elements (site, spin). Requires full support, n <= 14.
CorrelationMatrix correlation_matrix_spin(const ExactGibbsTable& table);
double spectral_independence_eta(const ExactGibbsTable& table);

/// alpha^2 Cov - alpha D for the homogenized measure: the Hessian of
/// log g(z^alpha) at z = 1.
Matrix flc_matrix(const ExactGibbsTable& table, double alpha);

struct FlcWitness {
  std::vector<double> lambda;
  double eigenvalue = 0.0;
  int tilt_index = 0;
};

struct FlcResult {
  bool pass = true;
  std::optional<FlcWitness> witness;
  int tilts_checked = 0;
  double max_eigenvalue = 0.0;
};

/// Falsification search: the all-ones tilt, then `tilt_samples` tilts drawn
/// log-uniformly from [1e-3, 1e3]^n. A witness is the first tilt whose FLC
/// matrix has an eigenvalue above `tolerance`. "pass" is not a certificate.
FlcResult flc_falsify(const ExactGibbsTable& table, double alpha, int tilt_samples = 256, std::uint64_t seed = 1,
                      double tolerance = 1e-10);

}  // namespace glauberlab::exact
