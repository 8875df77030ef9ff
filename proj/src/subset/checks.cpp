#include "glauberlab/subset/checks.hpp"

#include <cmath>
#include <limits>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/subset/operators.hpp"

namespace glauberlab::subset {

namespace {

// Element indices with positive marginal.
std::vector<int> live_elements(const SubsetDistribution& mu) {
  Mask seen = 0;
  for (Mask s : mu.support()) seen |= s;
  return mask_elements(seen);
}

}  // namespace

exact::CorrelationMatrix correlation_matrix_subset(const SubsetDistribution& mu) {
  const int n = mu.ground_size();
  Matrix pair = Matrix::Zero(n, n);
  for (const auto& [s, w] : mu.weights()) {
    const double p = w / mu.total();
    const std::vector<int> elems = mask_elements(s);
    for (int a : elems)
      for (int b : elems) pair(a, b) += p;
  }
  const Vector marginals = pair.diagonal();
  return exact::correlation_from_moments(marginals, pair);
}

Matrix flc_matrix_from_correlation(const SubsetDistribution& mu, double alpha) {
  const exact::CorrelationMatrix psi = correlation_matrix_subset(mu);
  const int n = mu.ground_size();
  Matrix out = Matrix::Zero(n, n);
  std::vector<double> marginal(n, 0.0);
  for (int a : psi.elements) marginal[a] = mu.marginal(Mask{1} << a);
  const auto k = static_cast<Eigen::Index>(psi.elements.size());
  for (Eigen::Index r = 0; r < k; ++r) {
    const int a = psi.elements[r];
    for (Eigen::Index c = 0; c < k; ++c) out(a, psi.elements[c]) = alpha * alpha * marginal[a] * psi.entries(r, c);
    out(a, a) -= alpha * marginal[a];
  }
  return out;
}

LocalIdentityReport si_local_identity_check(const SubsetDistribution& mu, double tolerance) {
  LocalIdentityReport r;
  r.k = mu.level();
  if (r.k < 1) throw DomainError("level must be at least 1");
  const exact::WalkOperator walk = up_down_walk(mu, 1, r.k);
  r.ergodic = is_ergodic(walk);
  r.lambda2 = exact::second_eigenvalue(walk);
  r.lambda_max = correlation_matrix_subset(mu).lambda_max;
  r.deviation = std::abs(r.k * r.lambda2 - r.lambda_max);
  r.pass = r.deviation <= tolerance;
  return r;
}

double trickledown_bound(double lambda, int k) {
  if (k < 3) throw DomainError("trickle-down needs k >= 3");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("link eigenvalue must lie in [0, 1)");
  return (1.0 - 2.0 / k) * lambda / (1.0 - lambda);
}

OppenheimReport oppenheim_verify(const SubsetDistribution& mu, double tolerance) {
  OppenheimReport r;
  const int k = mu.level();
  if (k < 3) {
    r.reason = "k < 3";
    return r;
  }
  const exact::WalkOperator walk = up_down_walk(mu, 1, k);
  if (!is_ergodic(walk)) {
    r.reason = "1 <-> k walk not ergodic";
    return r;
  }
  r.lambda2 = exact::second_eigenvalue(walk);
  for (int i : live_elements(mu)) {
    const SubsetDistribution li = link(mu, Mask{1} << i);
    const exact::WalkOperator lw = up_down_walk(li, 1, k - 1);
    if (!is_ergodic(lw)) {
      r.reason = "link walk at element " + std::to_string(i + 1) + " not ergodic";
      return r;
    }
    r.link_lambda = std::max(r.link_lambda, exact::second_eigenvalue(lw));
  }
  if (!(r.link_lambda < 1.0)) {
    r.reason = "link eigenvalue not below 1";
    return r;
  }
  r.applicable = true;
  r.bound = trickledown_bound(std::max(r.link_lambda, 0.0), k);
  r.pass = r.lambda2 <= r.bound + tolerance;
  return r;
}

double continuity_bound(double c, int k) {
  if (k < 3) throw DomainError("continuity bound needs k >= 3");
  if (!(c > 0.0) || !(k > 2.0 * c)) throw DomainError("hypothesis violated: need 0 < C < k/2");
  return c * (k - 1 - c) / (k - 2.0 * c);
}

ContinuityReport continuity_verify(const SubsetDistribution& mu, double tolerance) {
  ContinuityReport r;
  const int k = mu.level();
  if (k < 3) {
    r.reason = "k < 3";
    return r;
  }
  const exact::WalkOperator walk = down_up_walk(mu, k, k - 1);
  if (!is_ergodic(walk)) {
    r.reason = "k <-> k-1 walk not ergodic";
    return r;
  }
  for (int i : live_elements(mu)) {
    const SubsetDistribution li = link(mu, Mask{1} << i);
    const exact::WalkOperator lw = down_up_walk(li, k - 1, k - 2);
    if (!is_ergodic(lw)) {
      r.reason = "link walk at element " + std::to_string(i + 1) + " not ergodic";
      return r;
    }
    const double gap = exact::spectral_gap(lw);
    r.link_constant = std::max(r.link_constant, 1.0 / ((k - 1) * gap));
  }
  r.gap = exact::spectral_gap(walk);
  if (!(k > 2.0 * r.link_constant)) {
    r.reason = "hypothesis violated: k <= 2C";
    return r;
  }
  r.applicable = true;
  r.c_double_prime = continuity_bound(r.link_constant, k);
  r.bound = 1.0 / (r.c_double_prime * k);
  r.pass = r.gap >= r.bound - tolerance;
  return r;
}

SpectralIndependenceReport poincare_to_si_check(const SubsetDistribution& mu, double tolerance) {
  SpectralIndependenceReport r;
  const int k = mu.level();
  if (k < 1) throw DomainError("level must be at least 1");
  r.lambda_max = correlation_matrix_subset(mu).lambda_max;
  r.gap = exact::spectral_gap(down_up_walk(mu, k, k - 1));
  r.bound = r.gap > 0.0 ? 1.0 / (k * r.gap) : std::numeric_limits<double>::infinity();
  r.pass = r.lambda_max <= r.bound + tolerance;
  return r;
}

VarianceReport variance_contraction_check(const SubsetDistribution& mu, std::span<const double> v,
                                          double tolerance) {
  if (static_cast<int>(v.size()) != mu.ground_size()) throw DimensionError("one value per ground element");
  const int k = mu.level();
  if (k < 1) throw DomainError("level must be at least 1");
  auto linear = [&](Mask s, double& x, double& q) {
    x = 0.0;
    q = 0.0;
    for (int i : mask_elements(s)) {
      x += v[i];
      q += v[i] * v[i];
    }
  };
  double mean = 0.0;
  double second = 0.0;
  double x = 0.0;
  double q = 0.0;
  for (const auto& [s, w] : mu.weights()) {
    linear(s, x, q);
    mean += w / mu.total() * x;
    second += w / mu.total() * q;
  }
  double variance = 0.0;
  for (const auto& [s, w] : mu.weights()) {
    linear(s, x, q);
    variance += w / mu.total() * (x - mean) * (x - mean);
  }
  VarianceReport r;
  r.variance = variance;
  r.second_moment = second;
  const double gap = exact::spectral_gap(down_up_walk(mu, k, k - 1));
  r.constant = gap > 0.0 ? 1.0 / (k * gap) : std::numeric_limits<double>::infinity();
  r.pass = r.variance <= r.constant * r.second_moment + tolerance;
  return r;
}

}  // namespace glauberlab::subset
