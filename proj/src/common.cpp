#include <algorithm>
#include <cmath>

#include "glauberlab/common/combinatorics.hpp"
#include "glauberlab/common/linalg.hpp"

namespace glauberlab {

Vector symmetric_eigenvalues(const Matrix& a) {
  if (a.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double lambda_max_symmetric(const Matrix& a) {
  const Vector ev = symmetric_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev[ev.size() - 1];
}

double op_norm_symmetric(const Matrix& a, const PowerIterationOptions& opts) {
  if (a.rows() == 0) return 0.0;
  if (a.rows() <= 400) {
    const Vector ev = symmetric_eigenvalues(a);
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  }
  const double sq = power_iteration_psd(
      a.rows(), [&](const Vector& v) { return Vector(a * (a * v)); }, {}, opts);
  return std::sqrt(std::max(0.0, sq));
}

double pairwise_sum(const double* first, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += first[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(first, half) + pairwise_sum(first + half, count - half);
}

double binomial(int n, int k) noexcept {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::vector<Mask> k_subsets(int n, int k) {
  std::vector<Mask> out;
  if (k < 0 || k > n || n > 62) return out;
  if (k == 0) return {Mask{0}};
  const Mask limit = Mask{1} << n;
  for (Mask v = (Mask{1} << k) - 1; v < limit; v = next_same_popcount(v)) out.push_back(v);
  return out;
}

std::vector<Mask> k_subsets_of(Mask within, int k) {
  const std::vector<int> elems = mask_elements(within);
  std::vector<Mask> out;
  for (Mask local : k_subsets(static_cast<int>(elems.size()), k)) {
    Mask m = 0;
    for (std::size_t b = 0; b < elems.size(); ++b)
      if (local >> b & 1U) m |= Mask{1} << elems[b];
    out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> mask_elements(Mask m) {
  std::vector<int> out;
  while (m != 0) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

}  // namespace glauberlab
