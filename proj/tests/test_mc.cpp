#include "doctest.h"

#include <cmath>
#include <sstream>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"
#include "glauberlab/mc/sampler.hpp"
#include "glauberlab/pspin/model.hpp"
#include "glauberlab/spin/random.hpp"

using namespace glauberlab;
using namespace glauberlab::mc;
using spin::SpinHamiltonian;

namespace {

SpinHamiltonian random_h(int n, double scale, std::uint64_t seed) {
  return spin::random_hamiltonian({n, 3, spin::CoefficientLaw::gaussian, scale, 1.0}, seed);
}

SpinHamiltonian uniform_field(int n, double h) {
  std::map<spin::SiteSet, double> t;
  for (int i = 1; i <= n; ++i) t[{i}] = h;
  return SpinHamiltonian(n, t);
}

}  // namespace

TEST_CASE("heat-bath probabilities") {
  CHECK(plus_probability(0.0) == 0.5);
  CHECK(plus_probability(50.0) >= 1.0 - 1e-20);
  CHECK(plus_probability(-50.0) <= 1e-20);
  CHECK(plus_probability(0.3) == doctest::Approx(1.0 / (1.0 + std::exp(-0.6))));
  CHECK(plus_probability(-800.0) == 0.0);
  CHECK(plus_probability(800.0) == 1.0);
}

TEST_CASE("single steps") {
  const HamiltonianModel strong(uniform_field(3, 50.0));
  ChainState s = initial_state(3, 4, 0);
  for (int t = 0; t < 1000; ++t) {
    const std::vector<int> before = s.spins;
    const int site = glauber_step(strong, s);
    CHECK(s.spins[site - 1] == 1);
    for (int i = 1; i <= 3; ++i)
      if (i != site) CHECK(s.spins[i - 1] == before[i - 1]);
  }
  CHECK(s.step == 1000);

  const HamiltonianModel free(SpinHamiltonian(3));
  ChainState f = initial_state(3, 5, 0);
  int plus = 0;
  const int steps = 100000;
  for (int t = 0; t < steps; ++t) {
    const int site = glauber_step(free, f);
    plus += f.spins[site - 1] == 1 ? 1 : 0;
  }
  CHECK(std::abs(plus - steps / 2.0) <= 4.0 * std::sqrt(steps / 4.0));

  ChainState bad = initial_state(4, 1, 0);
  CHECK_THROWS_AS(glauber_step(free, bad), DimensionError);
}

TEST_CASE("empirical transitions match the exact operator") {
  const SpinHamiltonian h = random_h(5, 0.5, 17);
  const HamiltonianModel model(h);
  const Matrix counts = transition_counts(model, 1000000, 3);
  const exact::ExactGibbsTable table = exact::gibbs_table(h);
  const Matrix p(exact::glauber_operator(table).matrix);
  // Pooled chi-square over every row's multinomial, compared as a z-score.
  double chi2 = 0.0;
  int dof = 0;
  for (Eigen::Index x = 0; x < 32; ++x) {
    const double row = counts.row(x).sum();
    REQUIRE(row > 0.0);
    int outcomes = 0;
    for (Eigen::Index y = 0; y < 32; ++y) {
      if (p(x, y) == 0.0) {
        CHECK(counts(x, y) == 0.0);
        continue;
      }
      const double expected = row * p(x, y);
      chi2 += (counts(x, y) - expected) * (counts(x, y) - expected) / expected;
      ++outcomes;
    }
    dof += outcomes - 1;
  }
  const double z = (chi2 - dof) / std::sqrt(2.0 * dof);
  MESSAGE("chi2 " << chi2 << " on " << dof << " dof, z = " << z);
  CHECK(std::abs(z) <= 3.0);
  const TransitionFit fit = transition_fit(counts, p);
  CHECK(fit.dof == dof);
  CHECK(fit.z == doctest::Approx(z).epsilon(1e-12));
  CHECK(fit.forbidden_moves == 0);
  CHECK(fit.empty_rows == 0);

  // Detailed balance: flows x -> y and y -> x agree.
  const double total = counts.sum();
  for (Eigen::Index x = 0; x < 32; ++x)
    for (Eigen::Index y = x + 1; y < 32; ++y) {
      if (p(x, y) == 0.0) continue;
      const double flow = table.probs[x] * p(x, y);
      const double sd = std::sqrt(2.0 * flow / total);
      CHECK(std::abs(counts(x, y) - counts(y, x)) / total <= 3.0 * sd);
    }
}

TEST_CASE("runs are reproducible and independent of scheduling") {
  const HamiltonianModel model(random_h(6, 0.4, 2));
  RunOptions opts;
  opts.chains = 3;
  opts.steps = 5000;
  opts.burn_in = 1000;
  opts.thin = 7;
  opts.seed = 99;
  opts.threads = 1;
  const RunResult a = run_chains(model, opts);
  opts.threads = 3;
  const RunResult b = run_chains(model, opts);
  CHECK(a.samples.per_chain == b.samples.per_chain);
  CHECK(a.samples.samples_per_chain() == (5000 - 1000) / 7);
  CHECK(a.final_states[2].step == 5000);

  opts.chains = 2;
  const RunResult c = run_chains(model, opts);
  CHECK(c.samples.per_chain[0] == a.samples.per_chain[0]);
  CHECK(c.samples.per_chain[1] == a.samples.per_chain[1]);
  CHECK(a.samples.per_chain[0] != a.samples.per_chain[1]);

  // Stepping one state by hand replays the same chain.
  ChainState s = initial_state(6, 99, 1);
  for (int t = 0; t < 1007; ++t) glauber_step(model, s);
  const auto row = a.samples.sample(1, 0);
  for (int i = 0; i < 6; ++i) CHECK(row[i] == s.spins[i]);

  opts.burn_in = 6000;
  CHECK_THROWS_AS(run_chains(model, opts), DomainError);
}

TEST_CASE("zero Hamiltonian has zero mean magnetization") {
  const int n = 8;
  const HamiltonianModel model(SpinHamiltonian{n});
  RunOptions opts;
  opts.chains = 4;
  opts.burn_in = 100;
  opts.thin = 10 * n;
  opts.steps = opts.burn_in + opts.thin * 5000;
  opts.seed = 3;
  const RunResult r = run_chains(model, opts);
  const double m = static_cast<double>(r.samples.total_samples());
  CHECK(std::abs(r.summary.mean_magnetization) <= 4.0 / std::sqrt(n * m));
}

TEST_CASE("small Ising chain approaches the exact table") {
  const int n = 6;
  const Matrix j = spin::random_coupling(n, 0.15, 8);
  const SpinHamiltonian h = spin::ising(j, Vector::Constant(n, 0.1));
  RunOptions opts;
  opts.chains = 1;
  opts.burn_in = default_burn_in(n);
  opts.steps = opts.burn_in + 1000000;
  opts.seed = 12;
  const RunResult r = run_chains(HamiltonianModel(h), opts);
  const double tv = tv_to_exact(r.samples, exact::gibbs_table(h));
  MESSAGE("tv " << tv);
  CHECK(tv <= 0.05);
}

TEST_CASE("total variation to exact tables") {
  const SpinHamiltonian h = random_h(5, 0.6, 4);
  const exact::ExactGibbsTable table = exact::gibbs_table(h);
  double previous = 1.0;
  for (std::size_t m : {1000, 10000, 100000}) {
    const double tv = tv_to_exact(exact_samples(table, m, m), table);
    CHECK(tv <= 3.0 * std::sqrt(32.0 / m));
    CHECK(tv <= previous + 3.0 * std::sqrt(32.0 / m));
    previous = tv;
  }

  const std::vector<std::uint64_t> one{7};
  double max_p = 0.0;
  for (double p : table.probs) max_p = std::max(max_p, p);
  CHECK(tv_to_exact(one, table) >= 1.0 - max_p);

  const exact::ExactGibbsTable plus = exact::gibbs_table(uniform_field(4, 3.0));
  const exact::ExactGibbsTable minus = exact::gibbs_table(uniform_field(4, -3.0));
  CHECK(tv_to_exact(exact_samples(plus, 10000, 1), minus) > 0.95);
}

TEST_CASE("chain samples: total variation decays with sample size") {
  const SpinHamiltonian h = random_h(4, 0.4, 6);
  const exact::ExactGibbsTable table = exact::gibbs_table(h);
  const HamiltonianModel model(h);
  double previous = 1.0;
  for (std::uint64_t m : {1000, 10000, 100000}) {
    RunOptions opts;
    opts.burn_in = default_burn_in(4);
    opts.thin = 4;
    opts.steps = opts.burn_in + opts.thin * m;
    opts.seed = 77;
    const double tv = tv_to_exact(run_chains(model, opts).samples, table);
    CHECK(tv <= previous + 3.0 * std::sqrt(16.0 / m));
    previous = tv;
  }
}

TEST_CASE("gap estimates from autocorrelation") {
  const int n = 4;
  const HamiltonianModel free(SpinHamiltonian{n});
  const auto first = [](std::span<const int> s) { return static_cast<double>(s[0]); };
  const std::vector<double> traj = run_trajectory(free, 10000000, 100, 1, first);
  const GapEstimate e = gap_estimate_autocorr(traj);
  MESSAGE("uniform gap estimate " << e.gap << " over " << e.lags_used << " lags");
  CHECK(std::abs(e.gap - 0.25) <= 0.25 * 0.25);
  CHECK(e.gap >= 0.25 / 3.0);
  CHECK(e.gap <= 0.25 * 3.0);

  const std::vector<double> flat(1000, 2.0);
  CHECK_THROWS_AS(gap_estimate_autocorr(flat), DomainError);

  const SpinHamiltonian two(2, {{{1, 2}, 0.3}});
  const double exact_gap = exact::spectral_gap(exact::glauber_operator(exact::gibbs_table(two)));
  const auto magnet = [](std::span<const int> s) { return static_cast<double>(s[0] + s[1]); };
  const GapEstimate t = gap_estimate_autocorr(run_trajectory(HamiltonianModel(two), 2000000, 100, 2, magnet));
  MESSAGE("two-site estimate " << t.gap << " exact " << exact_gap);
  CHECK(t.gap >= exact_gap / 2.0);
  CHECK(t.gap <= exact_gap * 2.0);
}

TEST_CASE("streaming p-spin model drives the same chain as the materialized one") {
  pspin::PSpinSpec spec;
  spec.N = 9;
  spec.betas = {{2, 0.5}, {3, 0.7}};
  spec.seed = 4;
  const PSpinModel streaming(spec);
  const HamiltonianModel materialized(pspin::sample_pspin(spec));
  RunOptions opts;
  opts.steps = 20000;
  opts.seed = 8;
  CHECK(run_chains(streaming, opts).samples.per_chain == run_chains(materialized, opts).samples.per_chain);

  spec.N = 200;
  spec.betas = {{2, 0.3}, {3, 0.3}};
  const PSpinModel big(spec);
  opts.steps = 2000;
  opts.chains = 2;
  const RunResult r = run_chains(big, opts);
  CHECK(r.samples.samples_per_chain() == 2000);
}

TEST_CASE("sample files round trip") {
  const HamiltonianModel model(random_h(5, 0.3, 1));
  RunOptions opts;
  opts.chains = 2;
  opts.steps = 300;
  opts.thin = 3;
  opts.seed = 5;
  const SampleSet s = run_chains(model, opts).samples;
  for (SampleFormat f : {SampleFormat::csv, SampleFormat::hex}) {
    std::stringstream io;
    write_samples(io, s, f);
    const SampleSet back = read_samples(io);
    CHECK(back.per_chain == s.per_chain);
    CHECK(back.seed == 5);
    CHECK(back.steps == 300);
  }
  std::stringstream hex;
  write_samples(hex, s, SampleFormat::hex);
  std::string header;
  std::string row;
  std::getline(hex, header);
  std::getline(hex, row);
  CHECK(std::stoull(row, nullptr, 16) == s.corner(0, 0));

  pspin::PSpinSpec wide;
  wide.N = 70;
  wide.betas = {{2, 0.2}};
  opts.steps = 50;
  opts.thin = 10;
  const SampleSet w = run_chains(PSpinModel(wide), opts).samples;
  std::stringstream wio;
  write_samples(wio, w, SampleFormat::hex);
  CHECK(read_samples(wio).per_chain == w.per_chain);

  std::stringstream broken("# {\"n\":2,\"chains\":1,\"steps\":1,\"seed\":0,\"samples_per_chain\":1,\"format\":\"csv\"}\n1,0\n");
  CHECK_THROWS_AS(read_samples(broken), ParseError);
  CHECK_THROWS_AS(parse_sample_format("bin"), ParseError);
}
