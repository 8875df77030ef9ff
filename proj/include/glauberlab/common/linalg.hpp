#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

namespace glauberlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Dense symmetric eigensolves are used up to this dimension; larger
/// problems fall back to power iteration.
inline constexpr Eigen::Index kDenseEigenLimit = 2048;

struct PowerIterationOptions {
  double rel_tol = 1e-10;
  int max_iter = 100000;
  std::uint64_t seed = 0x5eed;
};

/// Eigenvalues of a symmetric matrix in ascending order.
Vector symmetric_eigenvalues(const Matrix& a);

/// Largest eigenvalue of a symmetric matrix.
double lambda_max_symmetric(const Matrix& a);

/// Spectral norm of a symmetric matrix, max |eigenvalue|. Dense solver for
/// small inputs, power iteration on a^2 otherwise.
double op_norm_symmetric(const Matrix& a, const PowerIterationOptions& opts = {});

/// Largest eigenvalue of a symmetric positive semidefinite operator given as
/// a matrix-vector product, restricted to the orthogonal complement of
/// `deflate` (unit vectors). Power iteration.
template <typename Apply>
double power_iteration_psd(Eigen::Index dim, Apply&& apply, const std::vector<Vector>& deflate,
                           const PowerIterationOptions& opts);

/// Pairwise (tree) summation for deterministic, accurate reductions.
double pairwise_sum(const double* first, std::size_t count);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace glauberlab

#include "glauberlab/common/rng.hpp"

namespace glauberlab {

template <typename Apply>
double power_iteration_psd(Eigen::Index dim, Apply&& apply, const std::vector<Vector>& deflate,
                           const PowerIterationOptions& opts) {
  CounterRng rng(opts.seed);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  auto project = [&](Vector& x) {
    for (const auto& d : deflate) x -= d.dot(x) * d;
  };
  project(v);
  if (v.norm() == 0.0) return 0.0;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Vector w = apply(v);
    project(w);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= opts.rel_tol * std::max(1e-300, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace glauberlab
