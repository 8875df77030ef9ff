#include "glauberlab/learn/pseudolikelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/parallel.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::learn {

IsingParams IsingParams::zeros(int n, double radius) {
  require(n >= 1, "IsingParams: n must be positive");
  IsingParams p;
  p.coupling = Matrix::Zero(n, n);
  p.field = Vector::Zero(n);
  p.radius = radius;
  return p;
}

void IsingParams::validate() const {
  const auto n = field.size();
  if (coupling.rows() != n || coupling.cols() != n) {
    throw DimensionError("IsingParams: coupling must be n x n with n = field length");
  }
  if (!coupling.allFinite() || !field.allFinite()) throw DomainError("IsingParams: non-finite entry");
  if (std::isnan(radius) || radius < 0.0) throw DomainError("IsingParams: radius must be nonnegative");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (coupling(i, i) != 0.0) throw DomainError("IsingParams: coupling diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (coupling(i, j) != coupling(j, i)) throw DomainError("IsingParams: coupling must be symmetric");
    }
  }
}

bool IsingParams::feasible(double slack) const {
  if (field.size() > 0 && field.cwiseAbs().maxCoeff() > radius + slack) return false;
  for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
    if (coupling.row(i).cwiseAbs().sum() > radius + slack) return false;
  }
  return true;
}

spin::SpinHamiltonian IsingParams::hamiltonian() const {
  validate();
  return spin::ising(coupling, field);
}

SampleMatrix::SampleMatrix(int n, std::vector<std::int8_t> entries) : n_(n), entries_(std::move(entries)) {
  require(n >= 1, "SampleMatrix: n must be positive");
  if (entries_.size() % static_cast<std::size_t>(n) != 0) {
    throw DimensionError("SampleMatrix: entry count is not a multiple of n");
  }
  for (auto e : entries_) {
    if (e != 1 && e != -1) throw DomainError("SampleMatrix: entries must be +1 or -1");
  }
}

SampleMatrix SampleMatrix::from_corners(int n, std::span<const std::uint64_t> corners) {
  require(n >= 1 && n <= 63, "SampleMatrix: corner indices need 1 <= n <= 63");
  std::vector<std::int8_t> entries;
  entries.reserve(corners.size() * static_cast<std::size_t>(n));
  for (auto c : corners) {
    if (c >> n != 0) throw DomainError("SampleMatrix: corner index out of range");
    for (int site = 1; site <= n; ++site) entries.push_back((c & spin::site_bit(n, site)) != 0 ? -1 : 1);
  }
  return SampleMatrix(n, std::move(entries));
}

SampleMatrix SampleMatrix::from_samples(const mc::SampleSet& samples) {
  std::vector<std::int8_t> entries;
  for (const auto& chain : samples.per_chain) entries.insert(entries.end(), chain.begin(), chain.end());
  return SampleMatrix(samples.n, std::move(entries));
}

std::span<const std::int8_t> SampleMatrix::row(std::size_t i) const {
  if (i >= rows()) throw DimensionError("SampleMatrix: row out of range");
  return {entries_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
}

SampleMatrix SampleMatrix::repeated(int times) const {
  require(times >= 1, "SampleMatrix: repeat count must be positive");
  std::vector<std::int8_t> out;
  out.reserve(entries_.size() * static_cast<std::size_t>(times));
  for (int t = 0; t < times; ++t) out.insert(out.end(), entries_.begin(), entries_.end());
  return SampleMatrix(n_, std::move(out));
}

double logistic_loss(double z) noexcept {
  const double t = 2.0 * z;
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

namespace {

// Derivative of logistic_loss.
double logistic_slope(double z) noexcept {
  const double t = 2.0 * z;
  if (t >= 0.0) return 2.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return 2.0 * e / (1.0 + e);
}

constexpr Eigen::Index kChunkRows = 128;

// Distinct rows with multiplicities. The loss only depends on these.
struct WeightedRows {
  Matrix x;  // distinct rows as doubles
  Vector weight;
  double total = 0.0;
};

WeightedRows compress(const SampleMatrix& samples) {
  const std::size_t m = samples.rows();
  if (m == 0) throw DomainError("pl_loss: no samples");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = samples.row(a);
    const auto rb = samples.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<std::size_t> heads;
  std::vector<double> counts;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0 || less(order[i - 1], order[i])) {
      heads.push_back(order[i]);
      counts.push_back(0.0);
    }
    counts.back() += 1.0;
  }
  WeightedRows w;
  const int n = samples.n();
  w.x.resize(static_cast<Eigen::Index>(heads.size()), n);
  w.weight.resize(static_cast<Eigen::Index>(heads.size()));
  for (std::size_t r = 0; r < heads.size(); ++r) {
    const auto row = samples.row(heads[r]);
    for (int j = 0; j < n; ++j) w.x(static_cast<Eigen::Index>(r), j) = row[static_cast<std::size_t>(j)];
    w.weight[static_cast<Eigen::Index>(r)] = counts[r];
  }
  w.total = static_cast<double>(m);
  return w;
}

void check_shapes(const IsingParams& params, int n) {
  params.validate();
  if (params.n() != n) throw DimensionError("pl_loss: parameter and sample dimensions differ");
}

// Loss, and optionally the gradient, over compressed rows. Chunks are fixed
// by the data, so the reduction order never depends on the thread count.
double evaluate(const IsingParams& params, const WeightedRows& rows, LossGradient* gradient, unsigned threads) {
  const Eigen::Index u = rows.x.rows();
  const Eigen::Index n = rows.x.cols();
  const Eigen::Index chunks = (u + kChunkRows - 1) / kChunkRows;
  std::vector<double> row_loss(static_cast<std::size_t>(u));
  std::vector<Matrix> chunk_outer(gradient ? static_cast<std::size_t>(chunks) : 0);
  std::vector<Vector> chunk_field(gradient ? static_cast<std::size_t>(chunks) : 0);

  parallel_for(
      static_cast<std::size_t>(chunks),
      [&](std::size_t c) {
        const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunkRows;
        const Eigen::Index len = std::min(kChunkRows, u - begin);
        const auto x = rows.x.middleRows(begin, len);
        Matrix act = x * params.coupling;
        act.rowwise() += params.field.transpose();
        Matrix v(len, n);
        for (Eigen::Index r = 0; r < len; ++r) {
          const double w = rows.weight[begin + r];
          double acc = 0.0;
          for (Eigen::Index j = 0; j < n; ++j) {
            const double z = -x(r, j) * act(r, j);
            acc += logistic_loss(z);
            v(r, j) = w * logistic_slope(z) * x(r, j);
          }
          row_loss[static_cast<std::size_t>(begin + r)] = w * acc;
        }
        if (gradient) {
          chunk_outer[c] = v.transpose() * x;
          chunk_field[c] = v.colwise().sum().transpose();
        }
      },
      threads);

  const double loss = pairwise_sum(row_loss) / rows.total;
  if (gradient) {
    // Tree combination over chunks.
    for (std::size_t stride = 1; stride < chunk_outer.size(); stride *= 2) {
      for (std::size_t i = 0; i + stride < chunk_outer.size(); i += 2 * stride) {
        chunk_outer[i] += chunk_outer[i + stride];
        chunk_field[i] += chunk_field[i + stride];
      }
    }
    const Matrix& outer = chunk_outer.front();
    gradient->coupling = -(outer + outer.transpose()) / rows.total;
    gradient->coupling.diagonal().setZero();
    gradient->field = -chunk_field.front() / rows.total;
  }
  return loss;
}

double param_dot(const Matrix& a, const Vector& af, const Matrix& b, const Vector& bf) {
  return 0.5 * a.cwiseProduct(b).sum() + af.dot(bf);
}

}  // namespace

double pl_loss(const IsingParams& params, const SampleMatrix& samples) {
  check_shapes(params, samples.n());
  return evaluate(params, compress(samples), nullptr, 1);
}

double pl_loss(const IsingParams& params, const SampleMatrix& samples, LossGradient& gradient) {
  check_shapes(params, samples.n());
  return evaluate(params, compress(samples), &gradient, 1);
}

Vector project_l1_ball(const Vector& x, double radius) {
  require(radius >= 0.0, "project_l1_ball: radius must be nonnegative");
  if (x.cwiseAbs().sum() <= radius) return x;
  if (radius == 0.0) return Vector::Zero(x.size());
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (auto& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::max(std::abs(x[i]) - theta, 0.0);
    out[i] = std::copysign(mag, x[i]);
  }
  return out;
}

namespace {

Vector off_diagonal_row(const Matrix& m, Eigen::Index j) {
  Vector out(m.cols() - 1);
  for (Eigen::Index k = 0, o = 0; k < m.cols(); ++k) {
    if (k != j) out[o++] = m(j, k);
  }
  return out;
}

void set_row_and_column(Matrix& m, Eigen::Index j, const Vector& values) {
  for (Eigen::Index k = 0, o = 0; k < m.cols(); ++k) {
    if (k == j) continue;
    m(j, k) = values[o];
    m(k, j) = values[o];
    ++o;
  }
}

}  // namespace

IsingParams project(const IsingParams& params) {
  params.validate();
  if (params.feasible()) return params;
  IsingParams out = params;
  const double r = params.radius;
  out.field = params.field.cwiseMax(-r).cwiseMin(r);

  const Eigen::Index n = params.coupling.rows();
  auto row_norm_max = [&](const Matrix& m) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) worst = std::max(worst, m.row(j).cwiseAbs().sum());
    return worst;
  };
  if (row_norm_max(params.coupling) > r) {
    // Dykstra over the row constraints; each increment lives on one row and
    // its mirrored column.
    Matrix x = params.coupling;
    std::vector<Vector> increments(static_cast<std::size_t>(n), Vector::Zero(n - 1));
    for (int sweep = 0; sweep < 100000; ++sweep) {
      double change = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const Vector y = off_diagonal_row(x, j) + increments[static_cast<std::size_t>(j)];
        const Vector projected = project_l1_ball(y, r);
        increments[static_cast<std::size_t>(j)] = y - projected;
        const Vector before = off_diagonal_row(x, j);
        change = std::max(change, (projected - before).cwiseAbs().maxCoeff());
        set_row_and_column(x, j, projected);
      }
      if (change <= 1e-14 * std::max(1.0, r)) break;
    }
    // Dykstra only converges in the limit; a uniform shrink restores exact
    // feasibility without breaking symmetry.
    for (double worst = row_norm_max(x); worst > r; worst = row_norm_max(x)) {
      x *= std::nextafter(r / worst, 0.0);
    }
    out.coupling = x;
  }
  return out;
}

FitResult fit_pl(const SampleMatrix& samples, const FitOptions& opts) {
  require(samples.rows() >= 1, "fit_pl: need at least one sample");
  require(opts.radius >= 0.0 && std::isfinite(opts.radius), "fit_pl: radius must be finite and nonnegative");
  require(opts.initial_step > 0.0 && opts.min_step > 0.0 && opts.min_step <= opts.initial_step,
          "fit_pl: invalid step schedule");
  require(opts.max_iter >= 0, "fit_pl: max_iter must be nonnegative");
  const WeightedRows rows = compress(samples);

  IsingParams x = IsingParams::zeros(samples.n(), opts.radius);
  LossGradient grad;
  double loss = evaluate(x, rows, &grad, opts.threads);

  FitResult result;
  result.loss_history.push_back(loss);
  IsingParams best = x;
  double best_loss = loss;
  int increases = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    double step = opts.initial_step;
    IsingParams candidate;
    double candidate_loss = 0.0;
    LossGradient candidate_grad;
    Matrix dj;
    Vector dh;
    for (;;) {
      IsingParams trial = x;
      trial.coupling -= step * grad.coupling;
      trial.field -= step * grad.field;
      candidate = project(trial);
      dj = candidate.coupling - x.coupling;
      dh = candidate.field - x.field;
      candidate_loss = evaluate(candidate, rows, &candidate_grad, opts.threads);
      const double sq = param_dot(dj, dh, dj, dh);
      const double model = loss + param_dot(grad.coupling, grad.field, dj, dh) + sq / (2.0 * step);
      // Once loss differences sink into rounding noise, test the curvature
      // along the step through the gradients instead.
      const bool noisy = std::abs(candidate_loss - loss) <= 1e-12 * std::abs(loss);
      const bool sufficient =
          noisy ? param_dot(candidate_grad.coupling - grad.coupling, candidate_grad.field - grad.field, dj, dh) <=
                      sq / step
                : candidate_loss <= model;
      if (sufficient) break;
      if (step * 0.5 < opts.min_step) break;
      step *= 0.5;
    }
    const double moved = std::sqrt(param_dot(dj, dh, dj, dh));
    increases = candidate_loss > loss ? increases + 1 : 0;
    if (increases >= 10) {
      std::ostringstream msg;
      msg << "fit_pl: loss increased for 10 consecutive steps at iteration " << iter << " (loss " << loss
          << ", step " << step << ", best " << best_loss << ")";
      throw ConvergenceError(msg.str());
    }
    x = std::move(candidate);
    loss = candidate_loss;
    grad = std::move(candidate_grad);
    result.loss_history.push_back(loss);
    result.iterations = iter + 1;
    if (loss < best_loss) {
      best_loss = loss;
      best = x;
    }
    if (moved / step <= opts.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.params = std::move(best);
  result.final_loss = best_loss;
  result.op_norm = op_norm_symmetric(result.params.coupling);
  return result;
}

double exact_kl(const exact::ExactGibbsTable& p, const IsingParams& params) {
  if (p.n != params.n()) throw DimensionError("exact_kl: table and parameter dimensions differ");
  if (p.n > 14) throw SizeError("exact_kl: n must be at most 14");
  const auto q = exact::gibbs_table(params.hamiltonian());
  std::vector<double> terms(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.probs[i] > 0.0) terms[i] = p.probs[i] * (p.log_probs[i] - q.log_probs[i]);
  }
  return pairwise_sum(terms);
}

std::string LearningCurveReport::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "m,mean_kl,std_kl,reference\n";
  for (const auto& r : rows) out << r.m << ',' << r.mean_kl << ',' << r.std_kl << ',' << r.reference << '\n';
  return out.str();
}

LearningCurveReport learning_curve(const IsingParams& truth, const LearningCurveOptions& opts) {
  truth.validate();
  if (truth.n() > 12) throw SizeError("learning_curve: n must be at most 12");
  LearningCurveReport report;
  if (opts.m_grid.empty()) return report;
  require(!opts.seeds.empty(), "learning_curve: need at least one seed");
  for (auto m : opts.m_grid) require(m >= 1, "learning_curve: sample sizes must be positive");

  const auto table = exact::gibbs_table(truth.hamiltonian());
  const std::size_t s = opts.seeds.size();
  std::vector<double> kl(opts.m_grid.size() * s);
  FitOptions fit = opts.fit;
  fit.threads = 1;
  parallel_for(kl.size(), [&](std::size_t idx) {
    const std::size_t m = opts.m_grid[idx / s];
    const std::uint64_t seed = opts.seeds[idx % s];
    const auto corners = mc::exact_samples(table, m, hash_words({seed, m}));
    const auto result = fit_pl(SampleMatrix::from_corners(truth.n(), corners), fit);
    kl[idx] = exact_kl(table, result.params);
  });

  for (std::size_t g = 0; g < opts.m_grid.size(); ++g) {
    LearningCurveRow row;
    row.m = opts.m_grid[g];
    const double* first = kl.data() + g * s;
    row.mean_kl = pairwise_sum(first, s) / static_cast<double>(s);
    if (s > 1) {
      double ss = 0.0;
      for (std::size_t i = 0; i < s; ++i) ss += (first[i] - row.mean_kl) * (first[i] - row.mean_kl);
      row.std_kl = std::sqrt(ss / static_cast<double>(s - 1));
    }
    report.rows.push_back(row);
  }
  const auto& head = report.rows.front();
  for (auto& row : report.rows) {
    row.reference = head.mean_kl * std::sqrt(static_cast<double>(head.m) / static_cast<double>(row.m));
  }
  return report;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json to_json(const IsingParams& params) {
  nlohmann::json j{{"J", matrix_json(params.coupling)}, {"h", vector_json(params.field)}};
  if (std::isfinite(params.radius)) j["R"] = params.radius;
  return j;
}

nlohmann::json to_json(const FitResult& fit) {
  return {{"J", matrix_json(fit.params.coupling)},
          {"h", vector_json(fit.params.field)},
          {"R", fit.params.radius},
          {"final_loss", fit.final_loss},
          {"op_norm", fit.op_norm}};
}

IsingParams params_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ParseError("Ising parameters: expected an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "J" && key != "h" && key != "R" && key != "final_loss" && key != "op_norm") {
        throw ParseError("Ising parameters: unknown key \"" + key + "\"");
      }
    }
    if (!j.contains("J") || !j.contains("h")) throw ParseError("Ising parameters: \"J\" and \"h\" are required");
    const auto h = j.at("h").get<std::vector<double>>();
    const auto rows = j.at("J").get<std::vector<std::vector<double>>>();
    IsingParams p = IsingParams::zeros(static_cast<int>(h.size()));
    if (rows.size() != h.size()) throw ParseError("Ising parameters: \"J\" must be n x n");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != h.size()) throw ParseError("Ising parameters: \"J\" must be n x n");
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        p.coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
      p.field[static_cast<Eigen::Index>(i)] = h[i];
    }
    if (j.contains("R")) p.radius = j.at("R").get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("Ising parameters: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ParseError(e.what());
  }
}

}  // namespace glauberlab::learn
