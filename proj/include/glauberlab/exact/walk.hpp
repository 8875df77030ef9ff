#pragma once

#include <span>

#include "glauberlab/common/linalg.hpp"
#include "glauberlab/exact/gibbs.hpp"

namespace glauberlab::exact {

enum class WalkKind { glauber, down_up, up_down };
const char* to_string(WalkKind k) noexcept;

/// Row-stochastic transition matrix with its stationary distribution.
struct WalkOperator {
  SparseMatrix matrix;
  Vector stationary;
  WalkKind kind = WalkKind::glauber;

  Eigen::Index dim() const noexcept { return matrix.rows(); }
};

/// Heat-bath Glauber dynamics of a full-support table; n <= 14.
WalkOperator glauber_operator(const ExactGibbsTable& table);

/// Throws unless rows sum to 1, the stationary vector is fixed and detailed
/// balance holds, each within `tol`.
void check_walk(const WalkOperator& op, double tol = 1e-10);
bool is_reversible(const WalkOperator& op, double tol = 1e-10);

/// D^{1/2} P D^{-1/2} as a dense matrix; symmetric for reversible walks.
Matrix symmetrized(const WalkOperator& op);

/// All eigenvalues of a reversible walk, ascending. dim <= 2048.
Vector walk_eigenvalues(const WalkOperator& op);

/// Second largest eigenvalue of a reversible walk.
double second_eigenvalue(const WalkOperator& op);

/// 1 - second eigenvalue. Dense for dim <= 2048, deflated power iteration
/// above. Throws DomainError on non-reversible input.
double spectral_gap(const WalkOperator& op);

/// 1/2 sum_{x,y} pi(x) P(x,y) (f(x)-f(y)) (g(x)-g(y)).
double dirichlet_form(const WalkOperator& op, std::span<const double> f, std::span<const double> g);

/// Glauber Dirichlet form through cavity fields:
/// (1/4n) sum_s mu(s) sum_j cosh^-2(B_j(s)) (f(s) - f(s with j flipped))^2.
double dirichlet_form_cosh(const spin::SpinHamiltonian& h, const ExactGibbsTable& table, std::span<const double> f);

}  // namespace glauberlab::exact
