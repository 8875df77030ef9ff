#include "doctest.h"

#include <cmath>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"
#include "glauberlab/exact/bounds.hpp"
#include "glauberlab/exact/correlation.hpp"
#include "glauberlab/exact/entropy.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"
#include "glauberlab/spin/random.hpp"

using namespace glauberlab;
using namespace glauberlab::exact;
using spin::SpinHamiltonian;

namespace {

SpinHamiltonian cycle(int n, double beta) {
  std::map<spin::SiteSet, double> t;
  for (int i = 1; i <= n; ++i) {
    const int j = i % n + 1;
    t[{std::min(i, j), std::max(i, j)}] += beta;
  }
  return SpinHamiltonian(n, t);
}

SpinHamiltonian random_h(int n, int degree, double scale, std::uint64_t seed) {
  return spin::random_hamiltonian({n, degree, spin::CoefficientLaw::gaussian, scale, 1.0}, seed);
}

std::vector<double> random_function(std::size_t size, CounterRng& rng) {
  std::vector<double> f(size);
  for (double& v : f) v = rng.normal();
  return f;
}

std::vector<double> positive_function(std::size_t size, CounterRng& rng, double sigma) {
  std::vector<double> f(size);
  for (double& v : f) v = std::exp(sigma * rng.normal());
  return f;
}

}  // namespace

TEST_CASE("gibbs tables of trivial Hamiltonians") {
  const ExactGibbsTable u = gibbs_table(SpinHamiltonian(3));
  for (double p : u.probs) CHECK(p == doctest::Approx(0.125));
  CHECK(u.log_Z == doctest::Approx(3.0 * std::log(2.0)));

  const double h = 0.8;
  const ExactGibbsTable one = gibbs_table(SpinHamiltonian(1, {{{1}, h}}));
  CHECK(one.probs[0] == doctest::Approx(std::exp(h) / (2.0 * std::cosh(h))));
  CHECK(one.probs[1] == doctest::Approx(std::exp(-h) / (2.0 * std::cosh(h))));

  const ExactGibbsTable r = gibbs_table(random_h(6, 3, 1.0, 9));
  double total = 0.0;
  for (double p : r.probs) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK_THROWS_AS(gibbs_table(SpinHamiltonian(21)), SizeError);
}

TEST_CASE("glauber operator of small uniform chains") {
  const WalkOperator one = glauber_operator(gibbs_table(SpinHamiltonian(1)));
  CHECK(Matrix(one.matrix).isApprox(Matrix::Constant(2, 2, 0.5)));

  const WalkOperator two = glauber_operator(gibbs_table(SpinHamiltonian(2)));
  const Matrix p(two.matrix);
  for (int x = 0; x < 4; ++x) {
    CHECK(p(x, x) == doctest::Approx(0.5));
    CHECK(p(x, x ^ 1) == doctest::Approx(0.25));
    CHECK(p(x, x ^ 2) == doctest::Approx(0.25));
    CHECK(p(x, x ^ 3) == 0.0);
  }
  CHECK_NOTHROW(check_walk(two));
}

TEST_CASE("glauber operator is reversible with the single-flip structure") {
  for (int trial = 0; trial < 5; ++trial) {
    const SpinHamiltonian h = random_h(5, 3, 0.8, 40 + trial);
    const ExactGibbsTable t = gibbs_table(h);
    const WalkOperator op = glauber_operator(t);
    CHECK_NOTHROW(check_walk(op, 1e-12));
    const Matrix p(op.matrix);
    for (int x = 0; x < 32; ++x) {
      for (int y = 0; y < 32; ++y) {
        if (std::popcount(static_cast<unsigned>(x ^ y)) > 1) CHECK(p(x, y) == 0.0);
        if (std::popcount(static_cast<unsigned>(x ^ y)) == 1)
          CHECK(p(x, y) == doctest::Approx(t.probs[y] / (t.probs[x] + t.probs[y]) / 5.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("uniform chains have gap 1/n and one-site chains gap 1") {
  for (int n = 2; n <= 4; ++n)
    CHECK(std::abs(spectral_gap(glauber_operator(gibbs_table(SpinHamiltonian(n)))) - 1.0 / n) <= 1e-12);
  for (double h : {0.0, 0.7, -3.0})
    CHECK(spectral_gap(glauber_operator(gibbs_table(SpinHamiltonian(1, {{{1}, h}})))) == doctest::Approx(1.0));
}

TEST_CASE("cycle Ising gaps match the numpy oracle and fall with beta") {
  // numpy.linalg.eigvalsh on the symmetrized 16-state matrix.
  const double oracle[] = {0.200656169943774, 0.155012759436194, 0.115737608250492, 0.041586348246961};
  const double betas[] = {0.1, 0.2, 0.3, 0.6};
  double previous = 1.0;
  for (int b = 0; b < 4; ++b) {
    const double gap = spectral_gap(glauber_operator(gibbs_table(cycle(4, betas[b]))));
    CHECK(std::abs(gap - oracle[b]) <= 1e-12);
    CHECK(gap < 0.25);
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("power iteration path agrees with the dense eigensolver") {
  const WalkOperator op = glauber_operator(gibbs_table(random_h(6, 2, 0.3, 3)));
  const Matrix a = symmetrized(op);
  const Vector root = op.stationary.cwiseSqrt();
  auto apply = [&](const Vector& v) { return Vector(a * v + v); };
  const double via_power = power_iteration_psd(a.rows(), apply, {root.normalized()}, {1e-14, 200000, 7}) - 1.0;
  CHECK(std::abs(via_power - second_eigenvalue(op)) <= 1e-8);
}

TEST_CASE("non-reversible input is rejected") {
  WalkOperator op;
  Matrix p(3, 3);
  p << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0;
  op.matrix = p.sparseView();
  op.stationary = Vector::Constant(3, 1.0 / 3.0);
  CHECK_THROWS_AS(spectral_gap(op), DomainError);
  CHECK_THROWS_AS(check_walk(op), DomainError);
}

TEST_CASE("dirichlet form matches the cavity-field form") {
  const SpinHamiltonian zero(1);
  const ExactGibbsTable u = gibbs_table(zero);
  const WalkOperator op = glauber_operator(u);
  const std::vector<double> plus{1.0, 0.0};
  CHECK(dirichlet_form(op, plus, plus) == doctest::Approx(0.25));
  CHECK(dirichlet_form_cosh(zero, u, plus) == doctest::Approx(0.25));
  const std::vector<double> constant(2, 4.2);
  CHECK(dirichlet_form(op, constant, constant) == 0.0);

  CounterRng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const SpinHamiltonian h = random_h(n, 3, 0.7, 600 + trial);
    const ExactGibbsTable t = gibbs_table(h);
    const std::vector<double> f = random_function(t.size(), rng);
    const double a = dirichlet_form(glauber_operator(t), f, f);
    CHECK(std::abs(a - dirichlet_form_cosh(h, t, f)) <= 1e-10);
  }
}

TEST_CASE("correlation matrix of uniform and product measures") {
  const CorrelationMatrix u = correlation_matrix_spin(gibbs_table(SpinHamiltonian(3)));
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      double expected = 0.0;
      if (a / 2 == b / 2) expected = a == b ? 0.5 : -0.5;
      CHECK(u.entries(a, b) == doctest::Approx(expected));
    }
  }
  CHECK(u.lambda_max == doctest::Approx(1.0));
  CHECK(spectral_independence_eta(gibbs_table(SpinHamiltonian(1, {{{1}, 2.0}}))) == doctest::Approx(1.0));

  const std::vector<double> bias{0.9, 0.2, 0.5, 0.05};
  const CorrelationMatrix p = correlation_matrix_spin(product_table(bias));
  CHECK(p.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      if (a / 2 != b / 2) CHECK(std::abs(p.entries(a, b)) < 1e-12);
}

TEST_CASE("eta matches the numpy oracle on the cycle") {
  // Largest real eigenvalue of the 8x8 matrix from numpy.linalg.eigvals.
  CHECK(std::abs(spectral_independence_eta(gibbs_table(cycle(4, 0.1))) - 1.221161729371021) <= 1e-10);
  CHECK(std::abs(spectral_independence_eta(gibbs_table(cycle(4, 0.6))) - 2.810155572084780) <= 1e-10);
}

TEST_CASE("eta is bounded by 1/(n gap) for random small-beta Ising models") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    const Matrix j = spin::random_coupling(n, 0.15, 700 + trial);
    Vector h(n);
    CounterRng rng(800 + trial);
    for (int i = 0; i < n; ++i) h[i] = rng.normal();
    const ExactGibbsTable t = gibbs_table(spin::ising(j, h));
    const double gap = spectral_gap(glauber_operator(t));
    CHECK(spectral_independence_eta(t) <= 1.0 / (n * gap) + 1e-9);
  }
}

TEST_CASE("tilts") {
  const ExactGibbsTable t = gibbs_table(random_h(4, 3, 0.5, 5));
  const std::vector<double> ones(4, 1.0);
  const ExactGibbsTable same = tilt(t, ones);
  for (std::size_t x = 0; x < t.size(); ++x) CHECK(same.probs[x] == doctest::Approx(t.probs[x]).epsilon(1e-14));

  const ExactGibbsTable u = tilt(gibbs_table(SpinHamiltonian(2)), std::vector<double>{3.0, 1.0});
  CHECK(u.probs[0] + u.probs[1] == doctest::Approx(0.75));

  const std::vector<double> a{2.0, 0.5, 1.5, 3.0};
  const std::vector<double> b{0.1, 4.0, 1.0, 0.7};
  std::vector<double> ab(4);
  for (int i = 0; i < 4; ++i) ab[i] = a[i] * b[i];
  const ExactGibbsTable twice = tilt(tilt(t, a), b);
  const ExactGibbsTable once = tilt(t, ab);
  for (std::size_t x = 0; x < t.size(); ++x) CHECK(twice.probs[x] == doctest::Approx(once.probs[x]).epsilon(1e-13));

  // Conditioning on site 1 = +1 commutes with a tilt of the other sites.
  const std::vector<double> other{1.0, 2.5, 0.3, 1.7};
  const ExactGibbsTable tilted = tilt(t, other);
  double z_t = 0.0;
  double z_tilted = 0.0;
  for (std::size_t x = 0; x < 8; ++x) {
    z_t += t.probs[x];
    z_tilted += tilted.probs[x];
  }
  double weight_sum = 0.0;
  std::vector<double> cond(8);
  for (std::size_t x = 0; x < 8; ++x) {
    double w = t.probs[x] / z_t;
    for (int i = 2; i <= 4; ++i)
      if ((x & spin::site_bit(4, i)) == 0) w *= other[i - 1];
    cond[x] = w;
    weight_sum += w;
  }
  for (std::size_t x = 0; x < 8; ++x) CHECK(cond[x] / weight_sum == doctest::Approx(tilted.probs[x] / z_tilted));
  CHECK_THROWS_AS(tilt(t, std::vector<double>{1.0, 0.0, 1.0, 1.0}), DomainError);
}

TEST_CASE("fractional log-concavity falsifier") {
  const ExactGibbsTable product = product_table(std::vector<double>{0.3, 0.6, 0.5, 0.9});
  const FlcResult ok = flc_falsify(product, 1.0, 256, 3);
  CHECK(ok.pass);
  CHECK(ok.tilts_checked == 257);

  const int n = 6;
  const Matrix j = (2.0 / n) * (Matrix::Ones(n, n) - Matrix::Identity(n, n));
  const ExactGibbsTable cw = gibbs_table(spin::ising(j, Vector::Zero(n)));
  const FlcResult bad = flc_falsify(cw, 1.0, 256, 3);
  REQUIRE_FALSE(bad.pass);
  CHECK(bad.witness->eigenvalue > 0.0);
  // The all-ones tilt already fails: eta there is about 5.05 (numpy oracle).
  CHECK(bad.witness->tilt_index == 0);
  CHECK(std::abs(spectral_independence_eta(cw) - 5.047900628907) <= 1e-9);

  // Small alpha: the -alpha D term dominates.
  const double small = lambda_max_symmetric(flc_matrix(cw, 1e-3));
  const double smaller = lambda_max_symmetric(flc_matrix(cw, 1e-4));
  CHECK(small < 0.0);
  CHECK(smaller < 0.0);
  CHECK_THROWS_AS(flc_falsify(cw, 0.0), DomainError);
  CHECK_THROWS_AS(flc_falsify(cw, 1.5), DomainError);
}

TEST_CASE("entropy functionals") {
  const ExactGibbsTable t = gibbs_table(random_h(4, 2, 0.5, 12));
  const std::vector<double> constant(t.size(), 2.0);
  CHECK(entropy_functional(t, constant) == 0.0);
  CHECK(site_entropy_sum(t, constant) == 0.0);

  CounterRng rng(13);
  const std::vector<double> f = positive_function(t.size(), rng, 1.0);
  double ef = 0.0;
  double eflogf = 0.0;
  for (std::size_t x = 0; x < t.size(); ++x) {
    ef += t.probs[x] * f[x];
    eflogf += t.probs[x] * f[x] * std::log(f[x]);
  }
  CHECK(entropy_functional(t, f) == doctest::Approx(eflogf - ef * std::log(ef)).epsilon(1e-12));
  CHECK(entropy_functional(t, f) > 0.0);

  const ExactGibbsTable product = product_table(std::vector<double>{0.2, 0.7, 0.5});
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> g = positive_function(product.size(), rng, 2.0);
    CHECK(entropy_functional(product, g) <= site_entropy_sum(product, g) * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(entropy_functional(t, std::vector<double>(t.size(), 0.0)), DomainError);
}

TEST_CASE("approximate tensorization search") {
  const ExactGibbsTable one = gibbs_table(SpinHamiltonian(1, {{{1}, 0.4}}));
  CHECK(at_constant_search(one).value == doctest::Approx(1.0));

  const ExactGibbsTable product = product_table(std::vector<double>{0.2, 0.7, 0.5});
  CHECK(at_constant_search(product, {12, 200, 5}).value <= 1.0 + 1e-6);

  // Two-site Ising 0.2 s1 s2 + 0.1 s1. scipy Nelder-Mead from 300 starts
  // gives sup 1.244935300556; a 21^3 grid gives 1.2438609748.
  const ExactGibbsTable two = gibbs_table(SpinHamiltonian(2, {{{1, 2}, 0.2}, {{1}, 0.1}}));
  const SearchResult a = at_constant_search(two, {16, 400, 1});
  const SearchResult b = at_constant_search(two, {16, 400, 2});
  CHECK(a.value <= 1.244935300556 + 1e-9);
  CHECK(a.value >= 1.2438609748);
  CHECK(std::abs(a.value - b.value) <= 1e-3);
  CHECK(entropy_functional(two, a.witness) / site_entropy_sum(two, a.witness) == doctest::Approx(a.value));
}

TEST_CASE("modified log-Sobolev search") {
  const ExactGibbsTable u1 = gibbs_table(SpinHamiltonian(1));
  // Ratio t atanh(t) / Ent(1+t, 1-t) decreases to 2 as t -> 0.
  const SearchResult r1 = mlsi_search(u1, glauber_operator(u1));
  CHECK(std::abs(r1.value - 2.0) <= 1e-6);

  // Linearization: f = 1 + eps (1_x - mu_x) gives ratio -> 2 E(g,g)/Var(g).
  const ExactGibbsTable t = gibbs_table(random_h(3, 2, 0.5, 77));
  const WalkOperator op = glauber_operator(t);
  std::vector<double> g(t.size(), 0.0);
  g[3] = 1.0;
  for (double& v : g) v -= t.probs[3];
  double var = 0.0;
  for (std::size_t x = 0; x < t.size(); ++x) var += t.probs[x] * g[x] * g[x];
  const double rayleigh = dirichlet_form(op, g, g) / var;
  std::vector<double> f(t.size());
  for (std::size_t x = 0; x < t.size(); ++x) f[x] = 1.0 + 1e-3 * g[x];
  CHECK(std::abs(mlsi_ratio(t, op, f) / (2.0 * rayleigh) - 1.0) < 0.05);

  const ExactGibbsTable u3 = gibbs_table(SpinHamiltonian(3));
  const WalkOperator op3 = glauber_operator(u3);
  const SearchResult r3 = mlsi_search(u3, op3);
  CHECK(r3.value <= 2.0 * spectral_gap(op3) + 1e-6);
  CHECK(r3.value > 0.0);
}

TEST_CASE("mixing time bounds by substitution") {
  const MixingBounds b1 = mixing_time_bounds(1.0, 1.0, 0.5, 0.25);
  CHECK(b1.lower_gamma == 0.0);
  const double min_prob = std::ldexp(1.0, -10);
  const MixingBounds b2 = mixing_time_bounds(0.1, 0.05, min_prob, 0.01);
  CHECK(b2.upper_gamma == doctest::Approx(10.0 * std::log(100.0 * 1024.0)));
  CHECK(b2.upper_mlsi == doctest::Approx(20.0 * (std::log(std::log(1024.0)) + std::log(5000.0))));
  CHECK_THROWS_AS(mixing_time_bounds(0.0, 0.5, 0.1, 0.1), DomainError);
  CHECK_THROWS_AS(mixing_time_bounds(0.5, 0.5, 0.1, 1.0), DomainError);
}

TEST_CASE("measured mixing time lies in the spectral sandwich") {
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial % 4;
    const ExactGibbsTable t = gibbs_table(random_h(n, 2, 0.4, 900 + trial));
    const WalkOperator op = glauber_operator(t);
    const double gap = spectral_gap(op);
    const MixingBounds b = mixing_time_bounds(gap, 1.0, t.min_prob(), 0.25);
    const long tau = measured_mixing_time(op, 0.25);
    CHECK(tau >= b.lower_gamma);
    CHECK(tau <= b.upper_gamma);
    CHECK(worst_tv_after(op, tau) <= 0.25);
    if (tau > 0) CHECK(worst_tv_after(op, tau - 1) > 0.25);
  }
}

TEST_CASE("comparison lemma") {
  const ExactGibbsTable base = gibbs_table(random_h(4, 2, 0.5, 21));
  const ComparisonReport none = comparison_check(base, std::vector<double>(base.size(), 0.0), 30, 1);
  CHECK(none.violations == 0);
  CHECK(std::abs(none.min_slack) <= 1e-12);

  const ComparisonReport shift = comparison_check(base, std::vector<double>(base.size(), 0.7), 30, 2);
  CHECK(shift.violations == 0);
  CHECK(shift.min_slack >= 0.0);

  CounterRng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const ExactGibbsTable b = gibbs_table(random_h(5, 3, 0.6, 1000 + trial));
    const std::vector<double> w = random_function(b.size(), rng);
    CHECK(comparison_check(b, w, 100, trial).violations == 0);
  }
}

TEST_CASE("spectral independence from contraction") {
  CHECK(si_from_contraction(1.0 - 1.0 / 5.0, 5) == doctest::Approx(1.0));
  CHECK(si_from_contraction(0.0, 1) == doctest::Approx(1.0));
  CHECK(si_from_contraction(1.0 - 2.0 / 6.0, 6) == doctest::Approx(0.5));
  CHECK_THROWS_AS(si_from_contraction(1.0, 3), DomainError);
}
