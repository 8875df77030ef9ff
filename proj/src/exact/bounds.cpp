#include "glauberlab/exact/bounds.hpp"

#include <cmath>

#include "glauberlab/common/errors.hpp"

namespace glauberlab::exact {

namespace {

double worst_tv(const Matrix& dist, const Vector& pi) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < dist.rows(); ++x)
    worst = std::max(worst, 0.5 * (dist.row(x).transpose() - pi).cwiseAbs().sum());
  return worst;
}

void check_dense_size(const WalkOperator& op) {
  if (op.dim() > 4096) throw SizeError("exact mixing propagation limited to 4096 states");
}

}  // namespace

MixingBounds mixing_time_bounds(double gamma, double rho, double min_prob, double eps) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
  if (!(min_prob > 0.0 && min_prob < 1.0)) throw DomainError("min_prob must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  MixingBounds b;
  b.lower_gamma = (1.0 / gamma - 1.0) * std::log(1.0 / (2.0 * eps));
  b.upper_gamma = std::log(1.0 / (eps * min_prob)) / gamma;
  b.upper_mlsi = (std::log(std::log(1.0 / min_prob)) + std::log(1.0 / (2.0 * eps * eps))) / rho;
  return b;
}

long measured_mixing_time(const WalkOperator& op, double eps, long max_steps) {
  check_dense_size(op);
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  Matrix dist = Matrix::Identity(op.dim(), op.dim());
  for (long t = 0; t <= max_steps; ++t) {
    if (worst_tv(dist, op.stationary) <= eps) return t;
    dist = dist * op.matrix;
  }
  return -1;
}

double worst_tv_after(const WalkOperator& op, long steps) {
  check_dense_size(op);
  Matrix dist = Matrix::Identity(op.dim(), op.dim());
  for (long t = 0; t < steps; ++t) dist = dist * op.matrix;
  return worst_tv(dist, op.stationary);
}

double si_from_contraction(double kappa, int n) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw DomainError("kappa must lie in [0, 1)");
  if (n < 1) throw DomainError("n must be positive");
  return 1.0 / (n * (1.0 - kappa));
}

}  // namespace glauberlab::exact
