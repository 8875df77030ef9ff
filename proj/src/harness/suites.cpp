#include "glauberlab/harness/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/parallel.hpp"
#include "glauberlab/common/rng.hpp"
#include "glauberlab/exact/bounds.hpp"
#include "glauberlab/exact/correlation.hpp"
#include "glauberlab/exact/entropy.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"
#include "glauberlab/learn/pseudolikelihood.hpp"
#include "glauberlab/mc/sampler.hpp"
#include "glauberlab/pspin/delta.hpp"
#include "glauberlab/pspin/model.hpp"
#include "glauberlab/spin/io.hpp"
#include "glauberlab/spin/random.hpp"
#include "glauberlab/spin/smoothness.hpp"
#include "glauberlab/subset/checks.hpp"
#include "glauberlab/subset/distribution.hpp"
#include "glauberlab/subset/operators.hpp"

namespace glauberlab::harness {

namespace {

using Json = nlohmann::json;
using Kind = InstanceSpec::Kind;

// ---------------------------------------------------------------- context

struct Context {
  const ExperimentConfig& config;
  const SuiteInfo& info;
  int count;
  double tol;
  InstanceSpec instance;

  std::uint64_t seed_for(std::uint64_t index, std::uint64_t salt = 0) const {
    return hash_words({config.seed, index, salt});
  }

  template <typename T>
  T option(const std::string& key, T fallback) const {
    if (!config.options.contains(key)) return fallback;
    try {
      return config.options.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ParseError("config key \"options." + key + "\": wrong type");
    }
  }

  bool from_file() const { return !instance.path.empty(); }
};

// Per-instance work in parallel, records concatenated in instance order.
void collect(const Context& ctx, int count, SuiteReport& report,
             const std::function<std::vector<CheckRecord>(int)>& work) {
  std::vector<std::vector<CheckRecord>> slots(static_cast<std::size_t>(count));
  parallel_for(
      slots.size(), [&](std::size_t i) { slots[i] = work(static_cast<int>(i)); }, ctx.config.threads);
  for (auto& s : slots) {
    for (auto& r : s) report.checks.push_back(std::move(r));
  }
}

std::string label(const std::string& kind, int index, const std::string& detail) {
  return kind + "#" + std::to_string(index) + "(" + detail + ")";
}

// ---------------------------------------------------------------- instances

struct NamedHamiltonian {
  std::string name;
  spin::SpinHamiltonian h;
};

NamedHamiltonian hamiltonian_instance(const Context& ctx, int i) {
  if (ctx.instance.kind == Kind::hamiltonian_file) return {ctx.instance.path, spin::read_hamiltonian(ctx.instance.path)};
  const auto& f = ctx.instance.hamiltonians;
  const int span = f.n_max - f.n_min + 1;
  spin::RandomHamiltonianOptions o;
  o.n = f.n_min + i % span;
  o.max_degree = f.max_degree > 0 ? f.max_degree : 1 + (i / span) % 3;
  o.law = law_for(f.law, i / (3 * span));
  o.scale = f.scale;
  o.density = f.density;
  o.max_degree = std::min(o.max_degree, o.n);
  const std::string detail = "n=" + std::to_string(o.n) + ",deg=" + std::to_string(o.max_degree) +
                             (o.law == spin::CoefficientLaw::gaussian ? ",gauss" : ",exp");
  return {label("random", i, detail), spin::random_hamiltonian(o, ctx.seed_for(static_cast<std::uint64_t>(i)))};
}

struct NamedSubset {
  std::string name;
  subset::SubsetDistribution mu;
};

NamedSubset subset_instance(const Context& ctx, int i) {
  if (ctx.instance.kind == Kind::subset_file) return {ctx.instance.path, subset::read_distribution(ctx.instance.path)};
  const auto& f = ctx.instance.subsets;
  const int span = f.n_max - f.n_min + 1;
  const int n = std::max(2, f.n_min + i % span);
  const int k_hi = std::min(f.k_max, n - 1);
  const int k_lo = std::min(f.k_min, k_hi);
  const int k = k_lo + (i / span) % (k_hi - k_lo + 1);
  const bool sparse = f.sparse && i % 2 == 1;
  const std::string detail = "C(" + std::to_string(n) + "," + std::to_string(k) + ")" + (sparse ? ",sparse" : "");
  return {label("random", i, detail),
          subset::random_distribution(n, k, ctx.seed_for(static_cast<std::uint64_t>(i)), sparse)};
}

int instance_count(const Context& ctx) { return ctx.from_file() ? 1 : ctx.count; }

std::vector<double> random_vector(std::size_t size, CounterRng& rng, double scale = 1.0) {
  std::vector<double> v(size);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return (a - b).cwiseAbs().maxCoeff();
}

spin::SpinHamiltonian scaled(const spin::SpinHamiltonian& h, double factor) {
  std::map<spin::SiteSet, double> terms;
  for (const auto& [s, c] : h.terms()) terms[s] = c * factor;
  return spin::SpinHamiltonian(h.n(), terms);
}

// Support-order vector of a homogenized measure from a corner-order vector.
std::vector<double> to_support_order(const subset::SubsetDistribution& hom, int n, std::span<const double> f) {
  const auto& support = hom.support();
  std::vector<double> out(support.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    const auto it = std::lower_bound(support.begin(), support.end(), subset::homogenized_set(n, x));
    out[static_cast<std::size_t>(it - support.begin())] = f[x];
  }
  return out;
}

// ---------------------------------------------------------------- suites

void theorem31(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const auto table = exact::gibbs_table(inst.h);
    const double gap = exact::spectral_gap(exact::glauber_operator(table));
    const double eta = exact::spectral_independence_eta(table);
    const double bound = 1.0 / (inst.h.n() * gap);
    return std::vector<CheckRecord>{{"eta <= 1/(n gap)",
                                     inst.name,
                                     {{"n", inst.h.n()}, {"gap", gap}, {"eta", eta}, {"bound", bound},
                                      {"min_prob", table.min_prob()}},
                                     table.full_support() && eta <= bound + ctx.tol,
                                     ctx.tol}};
  });
}

void si_local(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = subset_instance(ctx, i);
    const auto r = subset::si_local_identity_check(inst.mu, ctx.tol);
    return std::vector<CheckRecord>{{"k lambda2(U D) = lambda_max(Psi)",
                                     inst.name,
                                     {{"k", r.k}, {"lambda2", r.lambda2}, {"lambda_max", r.lambda_max},
                                      {"deviation", r.deviation}, {"ergodic", r.ergodic}},
                                     r.pass,
                                     ctx.tol}};
  });
}

void trickledown(const Context& ctx, SuiteReport& report) {
  std::vector<NamedSubset> chosen;
  if (ctx.from_file()) {
    chosen.push_back(subset_instance(ctx, 0));
  } else {
    // Screen candidates in order until enough ergodic instances are found.
    for (int attempt = 0; static_cast<int>(chosen.size()) < ctx.count; ++attempt) {
      if (attempt >= 50 * ctx.count) throw DomainError("trickledown: too few ergodic instances in the family");
      auto inst = subset_instance(ctx, attempt);
      const int k = inst.mu.level();
      if (subset::is_ergodic(subset::down_up_walk(inst.mu, k, k - 1))) chosen.push_back(std::move(inst));
    }
  }
  collect(ctx, static_cast<int>(chosen.size()), report, [&](int i) {
    const auto& inst = chosen[static_cast<std::size_t>(i)];
    const auto o = subset::oppenheim_verify(inst.mu, ctx.tol);
    const auto c = subset::continuity_verify(inst.mu, ctx.tol);
    return std::vector<CheckRecord>{
        {"trickle-down bound",
         inst.name,
         {{"applicable", o.applicable}, {"reason", o.reason}, {"lambda2", o.lambda2}, {"link_lambda", o.link_lambda},
          {"bound", o.bound}},
         o.pass,
         ctx.tol},
        {"continuity gap bound",
         inst.name,
         {{"applicable", c.applicable}, {"reason", c.reason}, {"link_constant", c.link_constant},
          {"c_double_prime", c.c_double_prime}, {"gap", c.gap}, {"bound", c.bound}},
         c.pass,
         ctx.tol}};
  });
}

void dirichlet_identity(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const int n = inst.h.n();
    const auto table = exact::gibbs_table(inst.h);
    const auto op = exact::glauber_operator(table);
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 1));
    const auto f = random_vector(table.size(), rng);
    const auto g = random_vector(table.size(), rng);
    const double direct = exact::dirichlet_form(op, f, f);
    const double cosh = exact::dirichlet_form_cosh(inst.h, table, f);
    const auto hom = subset::homogenize(table);
    const auto fh = to_support_order(hom, n, f);
    const auto gh = to_support_order(hom, n, g);
    const double covariance = subset::dirichlet_covariance_form(hom, fh, fh);
    const double bilinear = exact::dirichlet_form(op, f, g);
    const double bilinear_cov = subset::dirichlet_covariance_form(hom, fh, gh);
    const double dev = std::max({std::abs(direct - cosh), std::abs(direct - covariance), std::abs(bilinear - bilinear_cov)});
    return std::vector<CheckRecord>{{"dirichlet forms agree",
                                     inst.name,
                                     {{"definitional", direct}, {"cosh", cosh}, {"covariance", covariance},
                                      {"bilinear", bilinear}, {"bilinear_covariance", bilinear_cov}, {"deviation", dev}},
                                     dev <= ctx.tol,
                                     ctx.tol}};
  });
}

void t_equals_beta(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const double t = spin::t_constant(inst.h);
    const double beta = spin::smoothness_beta_exhaustive(inst.h).beta;
    return std::vector<CheckRecord>{{"T = beta", inst.name, {{"T", t}, {"beta", beta}}, std::abs(t - beta) <= ctx.tol, ctx.tol}};
  });
  if (ctx.from_file()) return;
  collect(ctx, 5, report, [&](int i) {
    const int n = 3 + i;
    const Matrix j = spin::random_coupling(n, 0.5, ctx.seed_for(static_cast<std::uint64_t>(i), 2));
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 3));
    Vector field(n);
    for (int s = 0; s < n; ++s) field[s] = rng.normal();
    const auto h = spin::ising(j, field);
    const double t = spin::t_constant(h);
    const double beta = spin::smoothness_beta_exhaustive(h).beta;
    const double norm = op_norm_symmetric(j);
    const double dev = std::max(std::abs(t - beta), std::abs(beta - norm));
    return std::vector<CheckRecord>{{"Ising T = beta = |J|_op",
                                     label("ising", i, "n=" + std::to_string(n)),
                                     {{"T", t}, {"beta", beta}, {"op_norm", norm}},
                                     dev <= ctx.tol,
                                     ctx.tol}};
  });
}

void uniform_truths(const Context& ctx, SuiteReport& report) {
  const int n_max = ctx.option<int>("n_max", 10);
  collect(ctx, n_max, report, [&](int i) {
    const int n = i + 1;
    const double gap = exact::spectral_gap(exact::glauber_operator(exact::gibbs_table(spin::SpinHamiltonian(n))));
    return std::vector<CheckRecord>{{"uniform gap = 1/n",
                                     "uniform(n=" + std::to_string(n) + ")",
                                     {{"n", n}, {"gap", gap}},
                                     std::abs(gap - 1.0 / n) <= ctx.tol,
                                     ctx.tol}};
  });
  collect(ctx, ctx.count, report, [&](int i) {
    const int n = 1 + i % n_max;
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 4));
    std::map<spin::SiteSet, double> terms;
    for (int s = 1; s <= n; ++s) terms[{s}] = 1.5 * rng.normal();
    const double eta = exact::spectral_independence_eta(exact::gibbs_table(spin::SpinHamiltonian(n, terms)));
    return std::vector<CheckRecord>{{"product eta = 1",
                                     label("product", i, "n=" + std::to_string(n)),
                                     {{"n", n}, {"eta", eta}},
                                     std::abs(eta - 1.0) <= ctx.tol,
                                     ctx.tol}};
  });
}

void small_beta_floor(const Context& ctx, SuiteReport& report) {
  const double max_beta = ctx.option<double>("max_beta", 0.05);
  const double factor = ctx.option<double>("floor_factor", 1.5);
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const int n = inst.h.n();
    const double beta = spin::smoothness_beta_exhaustive(inst.h).beta;
    if (beta > max_beta) {
      return std::vector<CheckRecord>{
          {"gap >= 1/(c n)", inst.name, {{"beta", beta}, {"applicable", false}}, true, ctx.tol}};
    }
    const double gap = exact::spectral_gap(exact::glauber_operator(exact::gibbs_table(inst.h)));
    const double floor = 1.0 / (factor * n);
    return std::vector<CheckRecord>{{"gap >= 1/(c n)",
                                     inst.name,
                                     {{"beta", beta}, {"applicable", true}, {"gap", gap}, {"floor", floor}},
                                     gap + ctx.tol >= floor,
                                     ctx.tol}};
  });
}

void flc_identity(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const int n = inst.h.n();
    const auto table = exact::gibbs_table(inst.h);
    const auto hom = subset::homogenize(table);
    const std::vector<double> ones(static_cast<std::size_t>(2 * n), 1.0);
    std::vector<CheckRecord> out;
    for (double alpha : {0.5, 1.0}) {
      const Matrix hessian = subset::log_generating_hessian(hom, ones, alpha);
      const Matrix flc = exact::flc_matrix(table, alpha);
      const Matrix from_corr = subset::flc_matrix_from_correlation(hom, alpha);
      const double dev = std::max(max_abs_diff(hessian, flc), max_abs_diff(hessian, from_corr));
      out.push_back({"log-generating Hessian = alpha^2 D Psi - alpha D", inst.name,
                     {{"alpha", alpha}, {"deviation", dev}}, dev <= ctx.tol, ctx.tol});
    }
    return out;
  });
  if (ctx.from_file()) return;

  const int tilts = ctx.option<int>("tilts", 256);
  const int n = 6;
  Matrix mean_field = Matrix::Constant(n, n, 2.0 / n);
  mean_field.diagonal().setZero();
  const auto mf = exact::flc_falsify(exact::gibbs_table(spin::ising(mean_field, Vector::Zero(n))), 1.0, tilts,
                                     ctx.seed_for(0, 5));
  Json witness = nullptr;
  if (mf.witness) witness = {{"eigenvalue", mf.witness->eigenvalue}, {"tilt_index", mf.witness->tilt_index}};
  report.checks.push_back({"FLC falsifier finds a witness", "mean-field(n=6,alpha=1)",
                           {{"tilts_checked", mf.tilts_checked}, {"max_eigenvalue", mf.max_eigenvalue}, {"witness", witness}},
                           !mf.pass && mf.witness.has_value(), 1e-10});

  collect(ctx, 5, report, [&](int i) {
    const int m = 2 + i;
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 6));
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& v : p) v = rng.uniform(0.05, 0.95);
    const auto r = exact::flc_falsify(exact::product_table(p), 1.0, tilts, ctx.seed_for(static_cast<std::uint64_t>(i), 7));
    return std::vector<CheckRecord>{{"FLC falsifier finds nothing on a product measure",
                                     label("product", i, "n=" + std::to_string(m)),
                                     {{"tilts_checked", r.tilts_checked}, {"max_eigenvalue", r.max_eigenvalue}},
                                     r.pass,
                                     1e-10}};
  });
}

void comparison_lemma(const Context& ctx, SuiteReport& report) {
  const int functions = ctx.option<int>("functions", 10);
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const auto base = exact::gibbs_table(inst.h);
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 8));
    const double w_scale = rng.uniform(0.0, 1.5);
    const auto w = random_vector(base.size(), rng, w_scale);
    const auto r = exact::comparison_check(base, w, functions, ctx.seed_for(static_cast<std::uint64_t>(i), 9), ctx.tol);
    return std::vector<CheckRecord>{{"Ent_mu f <= exp(2|W|) Ent_base f",
                                     inst.name,
                                     {{"trials", r.trials}, {"violations", r.violations}, {"min_slack", r.min_slack},
                                      {"w_sup", r.w_sup}},
                                     r.violations == 0,
                                     ctx.tol}};
  });
  if (ctx.from_file()) return;
  const double at_slack = ctx.option<double>("at_slack", 1e-6);
  collect(ctx, 4, report, [&](int i) {
    const int m = 2 + i;
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 10));
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& v : p) v = rng.uniform(0.1, 0.9);
    exact::SearchOptions so;
    so.seed = ctx.seed_for(static_cast<std::uint64_t>(i), 11);
    const auto r = exact::at_constant_search(exact::product_table(p), so);
    return std::vector<CheckRecord>{{"product AT ratio <= 1",
                                     label("product", i, "n=" + std::to_string(m)),
                                     {{"ratio", r.value}, {"evaluations", r.evaluations}},
                                     r.value <= 1.0 + at_slack,
                                     at_slack}};
  });
}

void mixing_sandwich(const Context& ctx, SuiteReport& report) {
  const double eps = ctx.option<double>("eps", 0.25);
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const auto table = exact::gibbs_table(inst.h);
    const auto op = exact::glauber_operator(table);
    const double gap = exact::spectral_gap(op);
    const auto b = exact::mixing_time_bounds(gap, 1.0, table.min_prob(), eps);
    const long tau = exact::measured_mixing_time(op, eps);
    const bool pass = tau >= 0 && tau >= b.lower_gamma && tau <= b.upper_gamma;
    return std::vector<CheckRecord>{{"spectral bracket contains tau",
                                     inst.name,
                                     {{"tau", tau}, {"lower", b.lower_gamma}, {"upper", b.upper_gamma}, {"gap", gap}},
                                     pass,
                                     0.0}};
  });
}

void homogenize_consistency(const Context& ctx, SuiteReport& report) {
  collect(ctx, instance_count(ctx), report, [&](int i) {
    const auto inst = hamiltonian_instance(ctx, i);
    const int n = inst.h.n();
    const auto table = exact::gibbs_table(inst.h);
    const auto hom = subset::homogenize(table);
    const double eta = exact::spectral_independence_eta(table);
    const double lambda = subset::correlation_matrix_subset(hom).lambda_max;
    const Matrix glauber(exact::glauber_operator(table).matrix);
    const Matrix walk(subset::down_up_walk(hom, n, n - 1).matrix);
    const auto& support = hom.support();
    double dev = 0.0;
    std::vector<Eigen::Index> idx(table.size());
    for (std::size_t x = 0; x < table.size(); ++x) {
      idx[x] = std::lower_bound(support.begin(), support.end(), subset::homogenized_set(n, x)) - support.begin();
    }
    for (std::size_t x = 0; x < table.size(); ++x) {
      for (std::size_t y = 0; y < table.size(); ++y) {
        dev = std::max(dev, std::abs(glauber(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) -
                                     walk(idx[x], idx[y])));
      }
    }
    return std::vector<CheckRecord>{
        {"eta = lambda_max of the homogenized measure", inst.name, {{"eta", eta}, {"lambda_max", lambda}},
         std::abs(eta - lambda) <= ctx.tol, ctx.tol},
        {"n <-> n-1 walk = Glauber", inst.name, {{"deviation", dev}}, dev <= ctx.tol, ctx.tol}};
  });
}

void sampler_fidelity(const Context& ctx, SuiteReport& report) {
  const auto samples = ctx.option<std::uint64_t>("samples", 1'000'000);
  const auto transition_steps = ctx.option<std::uint64_t>("transition_steps", 1'000'000);
  const double max_beta = ctx.option<double>("max_beta", 0.3);
  const int chains = ctx.option<int>("chains", 4);
  if (chains < 1 || samples < static_cast<std::uint64_t>(chains)) throw ParseError("config key \"options.chains\": invalid");
  std::ostringstream csv;
  csv << "instance,beta,tv,z,gap_exact,gap_autocorr\n";
  std::vector<std::string> rows(static_cast<std::size_t>(instance_count(ctx)));
  collect(ctx, instance_count(ctx), report, [&](int i) {
    auto inst = hamiltonian_instance(ctx, i);
    if (inst.h.n() > 10) throw SizeError("sampler-fidelity: n must be at most 10");
    double beta = spin::smoothness_beta_exhaustive(inst.h).beta;
    if (beta > max_beta) {
      inst.h = scaled(inst.h, max_beta / beta);
      beta = spin::smoothness_beta_exhaustive(inst.h).beta;
    }
    const auto table = exact::gibbs_table(inst.h);
    const mc::HamiltonianModel model(inst.h);
    mc::RunOptions opts;
    opts.chains = chains;
    opts.burn_in = mc::default_burn_in(inst.h.n());
    opts.steps = opts.burn_in + (samples + static_cast<std::uint64_t>(chains) - 1) / static_cast<std::uint64_t>(chains);
    opts.seed = ctx.seed_for(static_cast<std::uint64_t>(i), 12);
    opts.threads = 1;
    const auto run = mc::run_chains(model, opts);
    const double tv = mc::tv_to_exact(run.samples, table);

    const auto op = exact::glauber_operator(table);
    const Matrix exact_p(op.matrix);
    const auto fit = mc::transition_fit(mc::transition_counts(model, transition_steps, ctx.seed_for(static_cast<std::uint64_t>(i), 13)),
                                        exact_p);
    const double gap = exact::spectral_gap(op);
    const auto traj = mc::run_trajectory(model, 200000, opts.burn_in, ctx.seed_for(static_cast<std::uint64_t>(i), 14),
                                         [](std::span<const int> s) { return std::accumulate(s.begin(), s.end(), 0.0); });
    double est = std::nan("");
    try {
      est = mc::gap_estimate_autocorr(traj).gap;
    } catch (const DomainError&) {
    }
    std::ostringstream row;
    row.precision(17);
    row << inst.name << ',' << beta << ',' << tv << ',' << fit.z << ',' << gap << ',' << est << '\n';
    rows[static_cast<std::size_t>(i)] = row.str();
    return std::vector<CheckRecord>{
        {"TV to exact <= tolerance", inst.name,
         {{"beta", beta}, {"samples", run.samples.total_samples()}, {"tv", tv}}, tv <= ctx.tol, ctx.tol},
        {"transition frequencies within 3 sigma", inst.name,
         {{"chi_square", fit.chi_square}, {"dof", fit.dof}, {"z", fit.z}, {"forbidden_moves", fit.forbidden_moves},
          {"empty_rows", fit.empty_rows}},
         std::abs(fit.z) <= 3.0 && fit.forbidden_moves == 0 && fit.empty_rows == 0, 3.0}};
  });
  for (const auto& r : rows) csv << r;
  report.csv = csv.str();
}

void pspin_generator(const Context& ctx, SuiteReport& report) {
  const int draws = ctx.option<int>("draws", 10000);
  const int adversarial_n = ctx.option<int>("adversarial_n", 400);
  const double variance_tol = ctx.option<double>("variance_tolerance", 0.10);

  struct Case {
    int n;
    int p;
  };
  const std::vector<Case> cases{{8, 2}, {8, 3}, {16, 2}, {16, 3}};
  collect(ctx, static_cast<int>(cases.size()), report, [&](int c) {
    const auto [n, p] = cases[static_cast<std::size_t>(c)];
    pspin::PSpinSpec spec;
    spec.N = n;
    spec.betas = {{p, 1.0}};
    const std::vector<int> spins(static_cast<std::size_t>(n), 1);
    std::vector<double> energies(static_cast<std::size_t>(draws));
    for (int d = 0; d < draws; ++d) {
      spec.seed = ctx.seed_for(static_cast<std::uint64_t>(d), 100 + static_cast<std::uint64_t>(c));
      energies[static_cast<std::size_t>(d)] = pspin::energy_by_tuples(spec, spins);
    }
    const double mean = pairwise_sum(energies) / draws;
    double ss = 0.0;
    for (double e : energies) ss += (e - mean) * (e - mean);
    const double sample_var = ss / (draws - 1);
    const double expected = pspin::energy_variance(spec);
    const double rel = std::abs(sample_var / expected - 1.0);
    return std::vector<CheckRecord>{{"Var H matches the tuple count",
                                     "N=" + std::to_string(n) + ",p=" + std::to_string(p),
                                     {{"sample_variance", sample_var}, {"expected", expected}, {"relative_error", rel},
                                      {"draws", draws}},
                                     rel <= variance_tol,
                                     variance_tol}};
  });

  collect(ctx, ctx.count, report, [&](int i) {
    pspin::PSpinSpec spec;
    if (i % 2 == 0) {
      spec.N = 10;
      spec.betas = {{3, 1.3}};
    } else {
      spec.N = 9;
      spec.betas = {{2, 0.4}, {3, 0.8}, {4, 0.5}};
    }
    spec.seed = ctx.seed_for(static_cast<std::uint64_t>(i), 15);
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 16));
    std::vector<int> order(static_cast<std::size_t>(spec.N));
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    pspin::Subsystem sub;
    const int k = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.N - 2)));
    sub.free_block.assign(order.begin(), order.begin() + k);
    std::sort(sub.free_block.begin(), sub.free_block.end());
    std::vector<int> inside(order.begin(), order.begin() + k);
    const int pinned = static_cast<int>(rng.below(static_cast<std::uint64_t>(k / 2 + 1)));
    const int zeroed = static_cast<int>(rng.below(static_cast<std::uint64_t>((k - pinned) / 2 + 1)));
    sub.pinned.assign(inside.begin(), inside.begin() + pinned);
    sub.zeroed.assign(inside.begin() + pinned, inside.begin() + pinned + zeroed);
    std::sort(sub.pinned.begin(), sub.pinned.end());
    std::sort(sub.zeroed.begin(), sub.zeroed.end());
    sub.outer.resize(static_cast<std::size_t>(spec.N));
    sub.inner.resize(static_cast<std::size_t>(spec.N));
    for (auto& s : sub.outer) s = rng.below(2) == 0 ? 1 : -1;
    for (auto& s : sub.inner) s = rng.below(2) == 0 ? 1 : -1;
    const auto direct = pspin::delta_matrix(spec, sub);
    const auto via = pspin::delta_via_hessian(spec, sub);
    const double dev = direct.rows == via.rows ? max_abs_diff(direct.matrix, via.matrix) : std::numeric_limits<double>::infinity();
    return std::vector<CheckRecord>{{"pinned interaction matrix = pinned Hessian",
                                     label("pinning", i, "N=" + std::to_string(spec.N) + ",k=" + std::to_string(k)),
                                     {{"rows", direct.rows.size()}, {"deviation", dev}},
                                     dev <= ctx.tol,
                                     ctx.tol}};
  });

  pspin::PSpinSpec cubic;
  cubic.N = adversarial_n;
  cubic.betas = {{3, 1.0}};
  cubic.seed = ctx.config.seed;
  const auto a = pspin::adversarial_pinning(cubic);
  const double z = (a.entry - a.predicted_mean) / a.predicted_sd;
  report.checks.push_back({"adversarial pinning entry within 3 sigma",
                           "pure-3(N=" + std::to_string(adversarial_n) + ")",
                           {{"entry", a.entry}, {"predicted_mean", a.predicted_mean}, {"predicted_sd", a.predicted_sd}, {"z", z}},
                           std::abs(z) <= 3.0,
                           3.0});
}

learn::IsingParams sk_params(int n, double beta, std::uint64_t seed) {
  auto p = learn::IsingParams::zeros(n);
  p.coupling = spin::random_coupling(n, beta / std::sqrt(static_cast<double>(n)), seed);
  return p;
}

void learning(const Context& ctx, SuiteReport& report) {
  const auto m_grid = ctx.option<std::vector<std::size_t>>("m_grid", {1000, 10000, 100000});
  const int seeds = ctx.option<int>("seeds", 5);
  const int recovery_m = ctx.option<int>("recovery_m", 100000);
  const double recovery_tol = ctx.option<double>("recovery_tolerance", 0.02);

  // Gradient against central differences.
  collect(ctx, ctx.count, report, [&](int i) {
    const int n = 3 + i % 4;
    CounterRng rng(ctx.seed_for(static_cast<std::uint64_t>(i), 20));
    auto p = learn::IsingParams::zeros(n);
    for (int a = 0; a < n; ++a) {
      p.field[a] = 0.6 * rng.normal();
      for (int b = a + 1; b < n; ++b) p.coupling(a, b) = p.coupling(b, a) = 0.6 * rng.normal();
    }
    std::vector<std::int8_t> e(static_cast<std::size_t>(n) * 50);
    for (auto& v : e) v = rng.below(2) == 0 ? 1 : -1;
    const learn::SampleMatrix x(n, e);
    learn::LossGradient g;
    learn::pl_loss(p, x, g);
    const double h = 1e-5;
    double worst = 0.0;
    auto fd = [&](auto&& perturb) {
      auto up = p;
      auto down = p;
      perturb(up, h);
      perturb(down, -h);
      return (learn::pl_loss(up, x) - learn::pl_loss(down, x)) / (2 * h);
    };
    for (int a = 0; a < n; ++a) {
      worst = std::max(worst, std::abs(fd([&](learn::IsingParams& q, double d) { q.field[a] += d; }) - g.field[a]));
      for (int b = a + 1; b < n; ++b) {
        const double num = fd([&](learn::IsingParams& q, double d) {
          q.coupling(a, b) += d;
          q.coupling(b, a) += d;
        });
        worst = std::max(worst, std::abs(num - g.coupling(a, b)));
      }
    }
    return std::vector<CheckRecord>{{"gradient = central differences", label("random", i, "n=" + std::to_string(n)),
                                     {{"max_deviation", worst}}, worst <= ctx.tol, ctx.tol}};
  });

  // Product-measure recovery against the moment-matching solution.
  {
    const int n = 6;
    auto truth = learn::IsingParams::zeros(n);
    CounterRng rng(ctx.seed_for(0, 21));
    for (int a = 0; a < n; ++a) truth.field[a] = rng.uniform(-0.5, 0.5);
    const auto table = exact::gibbs_table(truth.hamiltonian());
    const auto corners = mc::exact_samples(table, static_cast<std::size_t>(recovery_m), ctx.seed_for(0, 22));
    const auto x = learn::SampleMatrix::from_corners(n, corners);
    learn::FitOptions fo;
    fo.threads = ctx.config.threads;
    const auto fit = learn::fit_pl(x, fo);
    double field_dev = 0.0;
    for (int a = 0; a < n; ++a) {
      double mean = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) mean += x.row(r)[static_cast<std::size_t>(a)];
      mean /= static_cast<double>(x.rows());
      field_dev = std::max(field_dev, std::abs(fit.params.field[a] - std::atanh(mean)));
    }
    const double coupling_dev = fit.params.coupling.cwiseAbs().maxCoeff();
    report.checks.push_back({"product recovery", "product(n=6,m=" + std::to_string(recovery_m) + ")",
                             {{"field_deviation", field_dev}, {"coupling_max", coupling_dev},
                              {"iterations", fit.iterations}, {"converged", fit.converged}},
                             field_dev <= recovery_tol && coupling_dev <= recovery_tol, recovery_tol});
  }

  // Exact-KL learning curve.
  learn::LearningCurveOptions lo;
  lo.m_grid = m_grid;
  for (int s = 0; s < seeds; ++s) lo.seeds.push_back(ctx.seed_for(static_cast<std::uint64_t>(s), 23));
  const auto curve = learn::learning_curve(sk_params(8, 0.2, ctx.seed_for(0, 24)), lo);
  bool decreasing = true;
  Json rows = Json::array();
  for (std::size_t r = 0; r < curve.rows.size(); ++r) {
    rows.push_back({{"m", curve.rows[r].m}, {"mean_kl", curve.rows[r].mean_kl}, {"std_kl", curve.rows[r].std_kl}});
    if (r > 0 && !(curve.rows[r].mean_kl < curve.rows[r - 1].mean_kl)) decreasing = false;
  }
  report.checks.push_back({"exact KL strictly decreasing in m", "SK(n=8,beta=0.2)", {{"rows", rows}}, decreasing, 0.0});
  report.csv = curve.csv();
}

void pspin_norm_decay(const Context& ctx, SuiteReport& report) {
  const auto scales = ctx.option<std::vector<double>>("beta_scales", {0.05, 0.1, 0.2, 0.4, 0.8});
  const int permutations = ctx.option<int>("permutations", 32);
  pspin::PSpinSpec base;
  if (ctx.instance.pspin) {
    base = *ctx.instance.pspin;
  } else {
    base.N = 16;
    base.betas = {{2, 1.0}};
  }
  base.seed = ctx.instance.pspin ? base.seed : ctx.config.seed;
  CounterRng rng(ctx.seed_for(0, 30));
  std::vector<int> spins(static_cast<std::size_t>(base.N));
  for (auto& s : spins) s = rng.below(2) == 0 ? 1 : -1;

  std::vector<pspin::NormSumReport> results(scales.size());
  parallel_for(
      scales.size(),
      [&](std::size_t i) {
        pspin::PSpinSpec spec = base;
        for (auto& [p, b] : spec.betas) b *= scales[i];
        pspin::NormSumOptions o;
        o.permutations = permutations;
        o.seed = ctx.seed_for(i, 31);
        results[i] = pspin::norm_sum_statistic(spec, spins, o);
      },
      ctx.config.threads);

  std::ostringstream csv;
  csv.precision(17);
  csv << "beta_scale,mean,median,q90,max\n";
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const auto& r = results[i];
    csv << scales[i] << ',' << r.mean << ',' << r.median << ',' << r.q90 << ',' << r.max << '\n';
    report.checks.push_back({"norm-sum statistic", "scale=" + std::to_string(scales[i]),
                             {{"mean", r.mean}, {"median", r.median}, {"q90", r.q90}, {"max", r.max},
                              {"permutations", r.permutations}},
                             true, 0.0});
  }
  if (base.N <= 32) {
    pspin::BadPinningOptions bo;
    for (int k = 4; k <= base.N / 2; k *= 2) bo.k_grid.push_back(k);
    bo.trials = ctx.option<int>("bad_pinning_trials", 32);
    bo.seed = ctx.seed_for(0, 32);
    const auto bad = pspin::bad_pinning_experiment(base, bo);
    for (const auto& row : bad.rows) {
      report.checks.push_back({"bad pinning fraction", "k=" + std::to_string(row.k),
                               {{"bad_fraction", row.bad_fraction}, {"threshold", row.threshold},
                                {"mean_statistic", row.mean_statistic}, {"trials", row.trials}},
                               true, 0.0});
    }
    csv << "\n" << bad.csv();
  }
  report.csv = csv.str();
}

// ---------------------------------------------------------------- registry

using SuiteFn = void (*)(const Context&, SuiteReport&);

struct Entry {
  SuiteInfo info;
  SuiteFn run;
};

InstanceSpec hamiltonians(int n_min, int n_max, int max_degree, double scale) {
  InstanceSpec s;
  s.kind = Kind::random_hamiltonian;
  s.hamiltonians = {n_min, n_max, max_degree, LawChoice::mixed, scale, 1.0};
  return s;
}

InstanceSpec subsets(int n_min, int n_max, int k_min, int k_max) {
  InstanceSpec s;
  s.kind = Kind::random_subset;
  s.subsets = {n_min, n_max, k_min, k_max, true};
  return s;
}

InstanceSpec pspin_default() {
  InstanceSpec s;
  s.kind = Kind::pspin;
  return s;
}

const std::vector<Kind> kHamiltonianKinds{Kind::random_hamiltonian, Kind::hamiltonian_file};
const std::vector<Kind> kSubsetKinds{Kind::random_subset, Kind::subset_file};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {{"theorem31", "spectral independence bounded by 1/(n gap)", 300, 1e-9, kHamiltonianKinds, hamiltonians(4, 8, 0, 0.3), {}, false},
       theorem31},
      {{"si-local", "k lambda2 of the 1 <-> k walk equals lambda_max(Psi)", 100, 1e-9, kSubsetKinds, subsets(3, 8, 2, 4), {}, false},
       si_local},
      {{"trickledown", "trickle-down and continuity bounds on ergodic instances", 100, 1e-9, kSubsetKinds, subsets(4, 7, 3, 4), {}, false},
       trickledown},
      {{"dirichlet-identity", "definitional, cosh and covariance Dirichlet forms", 50, 1e-10, kHamiltonianKinds, hamiltonians(2, 6, 0, 0.5), {}, false},
       dirichlet_identity},
      {{"t-equals-beta", "T equals the smoothness beta", 30, 1e-9, kHamiltonianKinds, hamiltonians(3, 8, 3, 0.4), {}, false},
       t_equals_beta},
      {{"uniform-truths", "uniform gap 1/n and product eta 1", 20, 1e-10, {}, {}, {"n_max"}, false},
       uniform_truths},
      {{"small-beta-floor", "gap at least 1/(1.5 n) when beta <= 0.05", 40, 1e-12, kHamiltonianKinds, hamiltonians(2, 10, 0, 0.01), {"max_beta", "floor_factor"}, false},
       small_beta_floor},
      {{"flc-identity", "log-generating Hessian identity and FLC falsifier", 20, 1e-10, kHamiltonianKinds, hamiltonians(2, 6, 0, 0.5), {"tilts"}, false},
       flc_identity},
      {{"comparison-lemma", "entropy comparison under bounded reweighting", 100, 1e-9, kHamiltonianKinds, hamiltonians(5, 5, 0, 0.5), {"functions", "at_slack"}, false},
       comparison_lemma},
      {{"mixing-sandwich", "measured mixing time inside the spectral bracket", 20, 0.0, kHamiltonianKinds, hamiltonians(2, 8, 0, 0.4), {"eps"}, false},
       mixing_sandwich},
      {{"homogenize-consistency", "homogenized measure reproduces eta and Glauber", 20, 1e-10, kHamiltonianKinds, hamiltonians(2, 5, 0, 0.6), {}, false},
       homogenize_consistency},
      {{"sampler-fidelity", "Glauber samples against the exact table", 1, 0.05, kHamiltonianKinds, hamiltonians(6, 6, 3, 0.1), {"samples", "transition_steps", "max_beta", "chains"}, false},
       sampler_fidelity},
      {{"pspin-generator", "p-spin variance, pinned Hessians and adversarial pinning", 50, 1e-9, {}, {}, {"draws", "adversarial_n", "variance_tolerance"}, false},
       pspin_generator},
      {{"learning", "pseudolikelihood gradient, recovery and learning curve", 20, 1e-6, {}, {}, {"m_grid", "seeds", "recovery_m", "recovery_tolerance"}, false},
       learning},
      {{"pspin-norm-decay", "norm-sum statistic and bad-pinning fractions (observational)", 1, 1.0, {Kind::pspin}, pspin_default(), {"beta_scales", "permutations", "bad_pinning_trials"}, true},
       pspin_norm_decay},
  };
  return entries;
}

const Entry& entry(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.info.name == name) return e;
  }
  throw ParseError("config key \"suite\": unknown suite \"" + name + "\"");
}

}  // namespace

const std::vector<SuiteInfo>& suites() {
  static const std::vector<SuiteInfo> infos = [] {
    std::vector<SuiteInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const SuiteInfo& suite_info(const std::string& name) { return entry(name).info; }

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

nlohmann::json SuiteReport::to_json() const {
  Json checks_json = Json::array();
  for (const auto& c : checks) {
    checks_json.push_back(
        {{"check", c.check}, {"instance", c.instance}, {"values", c.values}, {"pass", c.pass}, {"tolerance", c.tolerance}});
  }
  return {{"suite", suite},     {"version", GLAUBERLAB_VERSION}, {"config_hash", config_hash}, {"seed", seed},
          {"pass", pass()},     {"checks", checks_json}};
}

SuiteReport run_suite(const ExperimentConfig& config) {
  const Entry& e = entry(config.suite);
  const Context ctx{config, e.info, config.count > 0 ? config.count : e.info.default_count,
                    config.tolerance > 0.0 ? config.tolerance : e.info.default_tolerance,
                    e.info.instance_kinds.empty() ? e.info.default_instance
                                                  : resolve_instance(config, e.info.default_instance)};
  SuiteReport report;
  report.suite = config.suite;
  report.config_hash = harness::config_hash(config);
  report.seed = config.seed;
  e.run(ctx, report);
  if (e.info.report_only) {
    for (auto& c : report.checks) c.pass = true;
  }
  return report;
}

void write_report(const SuiteReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir) / report.suite;
  {
    std::ofstream out(base.string() + ".json");
    if (!out) throw std::runtime_error("cannot write " + base.string() + ".json");
    out << report.to_json().dump(2) << '\n';
  }
  if (!report.csv.empty()) {
    std::ofstream out(base.string() + ".csv");
    if (!out) throw std::runtime_error("cannot write " + base.string() + ".csv");
    out << report.csv;
  }
}

void print_summary(const SuiteReport& report, std::ostream& out) {
  int failed = 0;
  for (const auto& c : report.checks) {
    if (c.pass) continue;
    ++failed;
    out << "FAIL " << c.check << " [" << c.instance << "] " << c.values.dump() << '\n';
  }
  out << report.suite << ": " << report.checks.size() - static_cast<std::size_t>(failed) << "/" << report.checks.size()
      << " checks passed" << '\n';
}

}  // namespace glauberlab::harness
