#include "glauberlab/exact/walk.hpp"

#include <cmath>

#include "glauberlab/common/errors.hpp"

namespace glauberlab::exact {

const char* to_string(WalkKind k) noexcept {
  switch (k) {
    case WalkKind::glauber:
      return "glauber";
    case WalkKind::down_up:
      return "down-up";
    case WalkKind::up_down:
      return "up-down";
  }
  return "unknown";
}

WalkOperator glauber_operator(const ExactGibbsTable& table) {
  const int n = table.n;
  if (n < 1 || n > 14) throw SizeError("glauber_operator requires 1 <= n <= 14");
  if (!table.full_support()) throw DomainError("glauber_operator requires a full-support table");
  const auto dim = static_cast<Eigen::Index>(table.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * (n + 1));
  const double inv_n = 1.0 / n;
  for (Eigen::Index x = 0; x < dim; ++x) {
    double hold = 0.0;
    for (int i = 1; i <= n; ++i) {
      const auto y = static_cast<Eigen::Index>(static_cast<Mask>(x) ^ spin::site_bit(n, i));
      const double d = table.log_probs[x] - table.log_probs[y];
      // mu(y) / (mu(x) + mu(y)) and its complement, without overflow.
      const double move = 1.0 / (1.0 + std::exp(d));
      const double stay = 1.0 / (1.0 + std::exp(-d));
      trips.emplace_back(x, y, inv_n * move);
      hold += inv_n * stay;
    }
    trips.emplace_back(x, x, hold);
  }
  WalkOperator op;
  op.matrix.resize(dim, dim);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  op.stationary = Eigen::Map<const Vector>(table.probs.data(), dim);
  op.kind = WalkKind::glauber;
  return op;
}

bool is_reversible(const WalkOperator& op, double tol) {
  const auto& p = op.matrix;
  for (Eigen::Index x = 0; x < p.outerSize(); ++x) {
    for (SparseMatrix::InnerIterator it(p, x); it; ++it) {
      const double forward = op.stationary[x] * it.value();
      const double backward = op.stationary[it.col()] * p.coeff(it.col(), x);
      if (std::abs(forward - backward) > tol) return false;
    }
  }
  return true;
}

void check_walk(const WalkOperator& op, double tol) {
  const auto dim = op.dim();
  if (op.matrix.cols() != dim || op.stationary.size() != dim) throw DimensionError("walk shape mismatch");
  for (Eigen::Index x = 0; x < dim; ++x) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(op.matrix, x); it; ++it) {
      if (it.value() < 0.0) throw DomainError("negative transition probability");
      row += it.value();
    }
    if (std::abs(row - 1.0) > tol) throw DomainError("row " + std::to_string(x) + " does not sum to 1");
  }
  const Vector moved = op.matrix.transpose() * op.stationary;
  if ((moved - op.stationary).cwiseAbs().maxCoeff() > tol) throw DomainError("stationary vector is not fixed");
  if (!is_reversible(op, tol)) throw DomainError("walk is not reversible");
}

Matrix symmetrized(const WalkOperator& op) {
  const auto dim = op.dim();
  const Vector root = op.stationary.cwiseSqrt();
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x)
    for (SparseMatrix::InnerIterator it(op.matrix, x); it; ++it) a(x, it.col()) = root[x] * it.value() / root[it.col()];
  // Average with the transpose so roundoff cannot break symmetry.
  return 0.5 * (a + a.transpose());
}

Vector walk_eigenvalues(const WalkOperator& op) {
  if (op.dim() > kDenseEigenLimit) throw SizeError("full spectrum limited to dimension 2048");
  if (!is_reversible(op)) throw DomainError("spectrum requires a reversible walk");
  return symmetric_eigenvalues(symmetrized(op));
}

double second_eigenvalue(const WalkOperator& op) {
  if (!is_reversible(op)) throw DomainError("spectral gap requires a reversible walk");
  const auto dim = op.dim();
  if (dim <= 1) return 0.0;
  if (dim <= kDenseEigenLimit) {
    const Vector ev = symmetric_eigenvalues(symmetrized(op));
    return ev[dim - 2];
  }
  const Vector root = op.stationary.cwiseSqrt();
  const Vector inv_root = root.cwiseInverse();
  const Vector top = root.normalized();
  // A + I is positive semidefinite since the spectrum of A lies in [-1, 1].
  auto apply = [&](const Vector& v) {
    Vector w = root.cwiseProduct(op.matrix * inv_root.cwiseProduct(v));
    return Vector(w + v);
  };
  return power_iteration_psd(dim, apply, {top}, {}) - 1.0;
}

double spectral_gap(const WalkOperator& op) { return 1.0 - second_eigenvalue(op); }

double dirichlet_form(const WalkOperator& op, std::span<const double> f, std::span<const double> g) {
  const auto dim = op.dim();
  if (static_cast<Eigen::Index>(f.size()) != dim || static_cast<Eigen::Index>(g.size()) != dim)
    throw DimensionError("function length must equal the state count");
  std::vector<double> rows(static_cast<std::size_t>(dim), 0.0);
  for (Eigen::Index x = 0; x < dim; ++x) {
    double r = 0.0;
    for (SparseMatrix::InnerIterator it(op.matrix, x); it; ++it) {
      const auto y = it.col();
      r += it.value() * (f[x] - f[y]) * (g[x] - g[y]);
    }
    rows[x] = op.stationary[x] * r;
  }
  return 0.5 * pairwise_sum(rows);
}

double dirichlet_form_cosh(const spin::SpinHamiltonian& h, const ExactGibbsTable& table, std::span<const double> f) {
  const int n = h.n();
  if (n != table.n) throw DimensionError("hamiltonian and table disagree on n");
  if (f.size() != table.size()) throw DimensionError("function length must be 2^n");
  if (n == 0) return 0.0;
  std::vector<double> rows(table.size(), 0.0);
  for (std::size_t x = 0; x < table.size(); ++x) {
    const spin::Spins s = spin::spins_from_index(n, x);
    double r = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double c = std::cosh(spin::cavity_field(h, j, std::span<const int>(s)));
      const double diff = f[x] - f[x ^ spin::site_bit(n, j)];
      r += diff * diff / (c * c);
    }
    rows[x] = table.probs[x] * r;
  }
  return pairwise_sum(rows) / (4.0 * n);
}

}  // namespace glauberlab::exact
