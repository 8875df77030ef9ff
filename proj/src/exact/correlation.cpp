#include "glauberlab/exact/correlation.hpp"

#include <cmath>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::exact {

CorrelationMatrix correlation_from_moments(const Vector& marginals, const Matrix& pair_marginals) {
  const auto ground = marginals.size();
  if (pair_marginals.rows() != ground || pair_marginals.cols() != ground)
    throw DimensionError("pair marginals must be square over the ground set");
  CorrelationMatrix out;
  for (Eigen::Index a = 0; a < ground; ++a) {
    if (marginals[a] > 0.0) {
      out.elements.push_back(static_cast<int>(a));
    } else {
      out.pruned.push_back(static_cast<int>(a));
    }
  }
  const auto k = static_cast<Eigen::Index>(out.elements.size());
  out.entries.resize(k, k);
  Matrix sym(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const int a = out.elements[r];
    for (Eigen::Index c = 0; c < k; ++c) {
      const int b = out.elements[c];
      const double cov = pair_marginals(a, b) - marginals[a] * marginals[b];
      out.entries(r, c) = pair_marginals(a, b) / marginals[a] - marginals[b];
      sym(r, c) = cov / std::sqrt(marginals[a] * marginals[b]);
    }
  }
  out.lambda_max = k == 0 ? 0.0 : lambda_max_symmetric(0.5 * (sym + sym.transpose()));
  return out;
}

Matrix spin_pair_marginals(const ExactGibbsTable& table, Vector& marginals) {
  const int n = table.n;
  const int ground = 2 * n;
  Matrix pair = Matrix::Zero(ground, ground);
  std::vector<int> elems(n);
  for (std::size_t x = 0; x < table.size(); ++x) {
    const double p = table.probs[x];
    if (p == 0.0) continue;
    for (int i = 1; i <= n; ++i) elems[i - 1] = 2 * (i - 1) + ((x & spin::site_bit(n, i)) != 0 ? 1 : 0);
    for (int a : elems)
      for (int b : elems) pair(a, b) += p;
  }
  marginals = pair.diagonal();
  return pair;
}

CorrelationMatrix correlation_matrix_spin(const ExactGibbsTable& table) {
  if (table.n > 14) throw SizeError("correlation_matrix_spin requires n <= 14");
  if (!table.full_support()) throw DomainError("correlation_matrix_spin requires full support");
  Vector marginals;
  const Matrix pair = spin_pair_marginals(table, marginals);
  return correlation_from_moments(marginals, pair);
}

double spectral_independence_eta(const ExactGibbsTable& table) { return correlation_matrix_spin(table).lambda_max; }

Matrix flc_matrix(const ExactGibbsTable& table, double alpha) {
  Vector marginals;
  const Matrix pair = spin_pair_marginals(table, marginals);
  const Matrix cov = pair - marginals * marginals.transpose();
  Matrix out = alpha * alpha * cov;
  out.diagonal() -= alpha * marginals;
  return out;
}

FlcResult flc_falsify(const ExactGibbsTable& table, double alpha, int tilt_samples, std::uint64_t seed,
                      double tolerance) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (tilt_samples < 0) throw DomainError("tilt_samples must be nonnegative");
  if (!table.full_support()) throw DomainError("flc_falsify requires full support");
  const int n = table.n;
  CounterRng rng(seed, 0xf1c);
  const double lo = std::log(1e-3);
  const double hi = std::log(1e3);
  FlcResult result;
  result.max_eigenvalue = -std::numeric_limits<double>::infinity();
  std::vector<double> lambda(n, 1.0);
  for (int t = 0; t <= tilt_samples; ++t) {
    if (t > 0)
      for (double& l : lambda) l = std::exp(rng.uniform(lo, hi));
    const double top = lambda_max_symmetric(flc_matrix(tilt(table, lambda), alpha));
    ++result.tilts_checked;
    result.max_eigenvalue = std::max(result.max_eigenvalue, top);
    if (top > tolerance) {
      result.pass = false;
      result.witness = FlcWitness{lambda, top, t};
      break;
    }
  }
  return result;
}

}  // namespace glauberlab::exact
