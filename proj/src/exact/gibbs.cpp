#include "glauberlab/exact/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/linalg.hpp"

namespace glauberlab::exact {

bool ExactGibbsTable::full_support() const noexcept {
  return std::all_of(probs.begin(), probs.end(), [](double p) { return p > 0.0; });
}

double ExactGibbsTable::min_prob() const noexcept {
  double m = 1.0;
  for (double p : probs)
    if (p > 0.0) m = std::min(m, p);
  return m;
}

ExactGibbsTable table_from_log_weights(int n, std::vector<double> log_weights) {
  if (n < 0 || n > 24) throw SizeError("tables support 0 <= n <= 24");
  if (log_weights.size() != (std::size_t{1} << n)) throw DimensionError("log-weight vector must have 2^n entries");
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) throw DomainError("invalid log-weight");
    top = std::max(top, w);
  }
  if (top == -std::numeric_limits<double>::infinity()) throw DomainError("all weights are zero");
  std::vector<double> shifted(log_weights.size());
  for (std::size_t x = 0; x < log_weights.size(); ++x) shifted[x] = std::exp(log_weights[x] - top);
  const double log_norm = top + std::log(pairwise_sum(shifted));

  ExactGibbsTable t;
  t.n = n;
  t.log_Z = log_norm;
  t.probs.resize(log_weights.size());
  for (std::size_t x = 0; x < log_weights.size(); ++x) {
    log_weights[x] -= log_norm;
    t.probs[x] = std::exp(log_weights[x]);
  }
  t.log_probs = std::move(log_weights);
  return t;
}

ExactGibbsTable gibbs_table(const spin::SpinHamiltonian& h) {
  if (h.n() > 20) throw SizeError("gibbs_table requires n <= 20");
  return table_from_log_weights(h.n(), spin::corner_table(h));
}

ExactGibbsTable tilt(const ExactGibbsTable& table, std::span<const double> lambda) {
  const int n = table.n;
  if (static_cast<int>(lambda.size()) != n) throw DimensionError("tilt needs one factor per site");
  std::vector<double> log_lambda(n);
  for (int i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) throw DomainError("tilt factors must be positive");
    log_lambda[i] = std::log(lambda[i]);
  }
  std::vector<double> lw(table.log_probs);
  for (std::size_t x = 0; x < lw.size(); ++x) {
    if (lw[x] == -std::numeric_limits<double>::infinity()) continue;
    for (int i = 1; i <= n; ++i)
      if ((x & spin::site_bit(n, i)) == 0) lw[x] += log_lambda[i - 1];
  }
  return table_from_log_weights(n, std::move(lw));
}

ExactGibbsTable product_table(std::span<const double> p_plus) {
  const int n = static_cast<int>(p_plus.size());
  if (n > 24) throw SizeError("tables support n <= 24");
  std::vector<double> lw(std::size_t{1} << n, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double p = p_plus[i - 1];
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("marginals must lie in [0,1]");
    for (std::size_t x = 0; x < lw.size(); ++x) lw[x] += std::log((x & spin::site_bit(n, i)) != 0 ? 1.0 - p : p);
  }
  return table_from_log_weights(n, std::move(lw));
}

}  // namespace glauberlab::exact
