#include "glauberlab/exact/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::exact {

namespace {

constexpr double kClamp = 40.0;

// (1+d) log(1+d) - d for d >= -1.
double phi(double d) {
  if (std::abs(d) < 1e-4) {
    const double d2 = d * d;
    return d2 * (0.5 - d / 6.0 + d2 / 12.0 - d2 * d / 20.0);
  }
  if (d <= -1.0) return 1.0;
  return (1.0 + d) * std::log1p(d) - d;
}

void check_function(const ExactGibbsTable& table, std::span<const double> f) {
  if (f.size() != table.size()) throw DimensionError("function length must be 2^n");
  for (double v : f)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("function must be finite and nonnegative");
}

// Weighted entropy of f under weights c (not necessarily normalized):
// sum c_x f_x log f_x - F log F with F = sum c_x f_x / sum c_x, scaled by sum c.
double weighted_entropy(const double* c, const double* f, int count) {
  double mass = 0.0;
  double mean = 0.0;
  for (int a = 0; a < count; ++a) {
    mass += c[a];
    mean += c[a] * f[a];
  }
  if (mass == 0.0 || mean == 0.0) return 0.0;
  mean /= mass;
  double s = 0.0;
  for (int a = 0; a < count; ++a)
    if (c[a] > 0.0) s += c[a] * phi(f[a] / mean - 1.0);
  return mean * s;
}

struct Evaluation {
  double ent = 0.0;
  double site = 0.0;
  Vector grad_ent;
  Vector grad_site;
};

Evaluation evaluate_at(const ExactGibbsTable& table, const Vector& u, bool with_site) {
  const int n = table.n;
  const auto dim = static_cast<Eigen::Index>(table.size());
  const Vector f = u.array().exp();
  std::vector<double> fv(f.data(), f.data() + dim);
  Evaluation e;
  e.ent = entropy_functional(table, fv);
  double mean = 0.0;
  for (Eigen::Index x = 0; x < dim; ++x) mean += table.probs[x] * f[x];
  const double log_mean = std::log(mean);
  e.grad_ent.resize(dim);
  for (Eigen::Index x = 0; x < dim; ++x) e.grad_ent[x] = table.probs[x] * f[x] * (u[x] - log_mean);
  if (!with_site) return e;
  e.site = site_entropy_sum(table, fv);
  e.grad_site = Vector::Zero(dim);
  for (int v = 1; v <= n; ++v) {
    const Mask bit = spin::site_bit(n, v);
    for (Eigen::Index x = 0; x < dim; ++x) {
      if (static_cast<Mask>(x) & bit) continue;
      const auto y = static_cast<Eigen::Index>(static_cast<Mask>(x) | bit);
      const double w = table.probs[x] + table.probs[y];
      if (w == 0.0) continue;
      const double local = std::log((table.probs[x] * f[x] + table.probs[y] * f[y]) / w);
      e.grad_site[x] += table.probs[x] * f[x] * (u[x] - local);
      e.grad_site[y] += table.probs[y] * f[y] * (u[y] - local);
    }
  }
  return e;
}

Vector clamp_log(Vector u) {
  return u.array().min(kClamp).max(-kClamp).matrix();
}

// Maximizes objective(u) by gradient steps with an adaptive step length.
// `objective` returns the value and fills the gradient; NaN marks an invalid
// point.
template <typename Objective>
double ascend(Vector& u, int iters, Objective&& objective, int& evaluations) {
  Vector grad;
  double value = objective(u, grad);
  ++evaluations;
  if (!std::isfinite(value)) return value;
  double step = 1.0;
  Vector trial_grad;
  for (int it = 0; it < iters && step > 1e-12; ++it) {
    const double scale = grad.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) break;
    const Vector trial = clamp_log(u + (step / scale) * grad);
    const double next = objective(trial, trial_grad);
    ++evaluations;
    if (std::isfinite(next) && next > value) {
      u = trial;
      value = next;
      grad = trial_grad;
      step = std::min(step * 1.5, 8.0);
    } else {
      step *= 0.5;
    }
  }
  return value;
}

std::vector<double> normalized_witness(const ExactGibbsTable& table, const Vector& u) {
  std::vector<double> f(u.size());
  double mean = 0.0;
  for (Eigen::Index x = 0; x < u.size(); ++x) {
    f[x] = std::exp(u[x]);
    mean += table.probs[x] * f[x];
  }
  for (double& v : f) v /= mean;
  return f;
}

// Random log-function for restart r: Gaussian noise, a bump on one state, or
// a random linear function of the spins.
Vector random_start(const ExactGibbsTable& table, int r, CounterRng& rng) {
  const auto dim = static_cast<Eigen::Index>(table.size());
  const int n = table.n;
  Vector u = Vector::Zero(dim);
  switch (r % 3) {
    case 0: {
      const double sigma = 0.25 * std::pow(2.0, static_cast<double>((r / 3) % 5));
      for (Eigen::Index x = 0; x < dim; ++x) u[x] = sigma * rng.normal();
      break;
    }
    case 1: {
      const auto x = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(dim)));
      u[x] = rng.uniform(1.0, 20.0);
      break;
    }
    default: {
      std::vector<double> w(n);
      for (double& v : w) v = 2.0 * rng.normal();
      for (Eigen::Index x = 0; x < dim; ++x)
        for (int i = 1; i <= n; ++i) u[x] += (static_cast<Mask>(x) & spin::site_bit(n, i)) ? -w[i - 1] : w[i - 1];
      break;
    }
  }
  return clamp_log(u);
}

}  // namespace

double entropy_functional(const ExactGibbsTable& table, std::span<const double> f) {
  check_function(table, f);
  double mean = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) mean += table.probs[x] * f[x];
  if (!(mean > 0.0)) throw DomainError("function vanishes on the support");
  std::vector<double> terms(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x)
    if (table.probs[x] > 0.0) terms[x] = table.probs[x] * phi(f[x] / mean - 1.0);
  return mean * pairwise_sum(terms);
}

double site_entropy_sum(const ExactGibbsTable& table, std::span<const double> f) {
  check_function(table, f);
  const int n = table.n;
  std::vector<double> terms;
  terms.reserve(table.size() / 2 * static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v) {
    const Mask bit = spin::site_bit(n, v);
    for (std::size_t x = 0; x < table.size(); ++x) {
      if (x & bit) continue;
      const std::size_t y = x | bit;
      const double c[2] = {table.probs[x], table.probs[y]};
      const double fv[2] = {f[x], f[y]};
      terms.push_back(weighted_entropy(c, fv, 2));
    }
  }
  return pairwise_sum(terms);
}

SearchResult at_constant_search(const ExactGibbsTable& table, const SearchOptions& opts) {
  if (table.n > 10) throw SizeError("at_constant_search requires n <= 10");
  if (!table.full_support()) throw DomainError("at_constant_search requires full support");
  SearchResult best;
  best.value = -std::numeric_limits<double>::infinity();
  if (table.n == 1) {
    best.value = 1.0;
    best.witness = {2.0 * table.probs[1], 0.0};
    const double mean = table.probs[0] * best.witness[0];
    for (double& v : best.witness) v /= mean;
    return best;
  }
  auto objective = [&](const Vector& u, Vector& grad) {
    if (u.maxCoeff() - u.minCoeff() < 1e-5) return std::numeric_limits<double>::quiet_NaN();
    const Evaluation e = evaluate_at(table, u, true);
    if (!(e.ent > 1e-300) || !(e.site > 1e-300)) return std::numeric_limits<double>::quiet_NaN();
    grad = e.grad_ent / e.ent - e.grad_site / e.site;
    return std::log(e.ent) - std::log(e.site);
  };
  CounterRng rng(opts.seed, 0xa7);
  for (int r = 0; r < opts.restarts; ++r) {
    Vector u = random_start(table, r, rng);
    const double v = ascend(u, opts.iters, objective, best.evaluations);
    if (std::isfinite(v) && std::exp(v) > best.value) {
      best.value = std::exp(v);
      best.witness = normalized_witness(table, u);
    }
  }
  if (!std::isfinite(best.value)) throw ConvergenceError("no nondegenerate start found");
  return best;
}

double mlsi_ratio(const ExactGibbsTable& table, const WalkOperator& op, std::span<const double> f) {
  std::vector<double> logf(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) logf[x] = std::log(f[x]);
  return dirichlet_form(op, f, logf) / entropy_functional(table, f);
}

SearchResult mlsi_search(const ExactGibbsTable& table, const WalkOperator& op, const SearchOptions& opts) {
  if (op.dim() != static_cast<Eigen::Index>(table.size())) throw DimensionError("operator and table disagree");
  if (!table.full_support()) throw DomainError("mlsi_search requires full support");
  const auto dim = op.dim();
  auto objective = [&](const Vector& u, Vector& grad) {
    // Below this spread the ratio is lost to rounding; the infimum there is
    // approached along the slowest eigenvector start anyway.
    if (u.maxCoeff() - u.minCoeff() < 1e-5) return std::numeric_limits<double>::quiet_NaN();
    const Evaluation e = evaluate_at(table, u, false);
    const Vector f = u.array().exp();
    double form = 0.0;
    grad.resize(dim);
    for (Eigen::Index x = 0; x < dim; ++x) {
      double g = 0.0;
      for (SparseMatrix::InnerIterator it(op.matrix, x); it; ++it) {
        const auto y = it.col();
        const double w = table.probs[x] * it.value();
        const double df = f[y] * std::expm1(u[x] - u[y]);
        form += 0.5 * w * df * (u[x] - u[y]);
        g += w * (f[x] * (u[x] - u[y]) + df);
      }
      grad[x] = g;
    }
    if (!(e.ent > 1e-300) || !(form > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    // Descent on log(form / ent) as ascent on its negation.
    grad = e.grad_ent / e.ent - grad / form;
    return std::log(e.ent) - std::log(form);
  };

  std::vector<Vector> starts;
  if (dim <= kDenseEigenLimit && dim > 1) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(op));
    Vector slow = es.eigenvectors().col(dim - 2).cwiseQuotient(op.stationary.cwiseSqrt());
    slow /= slow.cwiseAbs().maxCoeff();
    for (double eps : {1e-4, 1e-2, 0.3}) starts.push_back(((1.0 + eps * slow.array()).log()).matrix());
  }
  CounterRng rng(opts.seed, 0x715);
  for (int r = 0; r < opts.restarts; ++r) starts.push_back(random_start(table, r, rng));

  SearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (Vector& u : starts) {
    const double v = ascend(u, opts.iters, objective, best.evaluations);
    if (std::isfinite(v) && std::exp(-v) < best.value) {
      best.value = std::exp(-v);
      best.witness = normalized_witness(table, u);
    }
  }
  if (!std::isfinite(best.value)) throw ConvergenceError("no nondegenerate start found");
  return best;
}

ComparisonReport comparison_check(const ExactGibbsTable& base, std::span<const double> w, int trials,
                                  std::uint64_t seed, double tolerance) {
  if (w.size() != base.size()) throw DimensionError("perturbation table must have 2^n entries");
  if (trials < 0) throw DomainError("trials must be nonnegative");
  std::vector<double> lw(base.log_probs);
  double sup = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    if (!std::isfinite(w[x])) throw DomainError("perturbation must be finite");
    lw[x] += w[x];
    sup = std::max(sup, std::abs(w[x]));
  }
  const ExactGibbsTable mu = table_from_log_weights(base.n, std::move(lw));
  const double factor = std::exp(2.0 * sup);

  ComparisonReport report;
  report.w_sup = sup;
  report.min_slack = std::numeric_limits<double>::infinity();
  CounterRng rng(seed, 0xc0);
  std::vector<double> f(base.size());
  for (int t = 0; t < trials; ++t) {
    do {
      const int mode = t % 3;
      const double sigma = std::pow(10.0, rng.uniform(-1.0, 0.7));
      for (double& v : f) {
        if (mode == 0) {
          v = std::exp(sigma * rng.normal());
        } else if (mode == 1) {
          v = rng.uniform() < 0.5 ? 0.0 : rng.exponential();
        } else {
          v = rng.uniform() < 0.3 ? 1.0 : 0.0;
        }
      }
    } while (std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; }));
    const double slack = factor * entropy_functional(base, f) - entropy_functional(mu, f);
    report.min_slack = std::min(report.min_slack, slack);
    if (slack < -tolerance) ++report.violations;
    ++report.trials;
  }
  return report;
}

}  // namespace glauberlab::exact
