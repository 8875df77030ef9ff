#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glauberlab/common/linalg.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/mc/sampler.hpp"
#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::learn {

/// Ising model exp(0.5 <s, J s> + <h, s>) together with its constraint box.
struct IsingParams {
  Matrix coupling;
  Vector field;
  /// Bound on every l1 row norm of the coupling and on every |h_j|.
  double radius = std::numeric_limits<double>::infinity();
  /// Bound on the operator norm of the coupling. Reported, never enforced.
  double op_bound = std::numeric_limits<double>::infinity();

  static IsingParams zeros(int n, double radius = std::numeric_limits<double>::infinity());

  int n() const noexcept { return static_cast<int>(field.size()); }
  /// Shapes, symmetry, zero diagonal and finiteness.
  void validate() const;
  bool feasible(double slack = 0.0) const;
  spin::SpinHamiltonian hamiltonian() const;
};

/// m samples of n spins, each entry +1 or -1.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(int n, std::vector<std::int8_t> entries);

  static SampleMatrix from_corners(int n, std::span<const std::uint64_t> corners);
  static SampleMatrix from_samples(const mc::SampleSet& samples);

  int n() const noexcept { return n_; }
  std::size_t rows() const noexcept { return n_ == 0 ? 0 : entries_.size() / static_cast<std::size_t>(n_); }
  std::span<const std::int8_t> row(std::size_t i) const;

  /// The same samples repeated `times` times.
  SampleMatrix repeated(int times) const;

 private:
  int n_ = 0;
  std::vector<std::int8_t> entries_;
};

/// Derivative of the loss with respect to each shared coupling J_jk = J_kj
/// (stored symmetrically) and each field entry.
struct LossGradient {
  Matrix coupling;
  Vector field;
};

/// log(1 + e^{2z}), stable for large |z|.
double logistic_loss(double z) noexcept;

double pl_loss(const IsingParams& params, const SampleMatrix& samples);
double pl_loss(const IsingParams& params, const SampleMatrix& samples, LossGradient& gradient);

/// Euclidean projection of the free parameters (upper-triangle couplings and
/// fields) onto the box. Feasible input is returned unchanged.
IsingParams project(const IsingParams& params);

/// Euclidean projection onto {x : |x|_1 <= radius}.
Vector project_l1_ball(const Vector& x, double radius);

struct FitOptions {
  double radius = 5.0;
  int max_iter = 5000;
  double initial_step = 1.0;
  double min_step = 1e-10;
  /// Stop once the gradient mapping falls below this.
  double tolerance = 1e-9;
  unsigned threads = 0;
};

struct FitResult {
  IsingParams params;
  double final_loss = 0.0;
  double op_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;
};

/// Projected gradient descent with backtracking. Returns the best iterate.
FitResult fit_pl(const SampleMatrix& samples, const FitOptions& opts = {});

/// KL(p || model) with the model enumerated exactly; n <= 14.
double exact_kl(const exact::ExactGibbsTable& p, const IsingParams& params);

struct LearningCurveRow {
  std::size_t m = 0;
  double mean_kl = 0.0;
  double std_kl = 0.0;
  /// mean_kl at the first grid point scaled by sqrt(m_0 / m).
  double reference = 0.0;
};

struct LearningCurveReport {
  std::vector<LearningCurveRow> rows;
  std::string csv() const;
};

struct LearningCurveOptions {
  std::vector<std::size_t> m_grid;
  std::vector<std::uint64_t> seeds;
  FitOptions fit;
};

/// Exact i.i.d. samples from the true model, a fit per (m, seed), exact KL.
/// Requires n <= 12.
LearningCurveReport learning_curve(const IsingParams& truth, const LearningCurveOptions& opts);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const IsingParams& params);
IsingParams params_from_json(const nlohmann::json& j);

}  // namespace glauberlab::learn
