#include "doctest.h"

#include <cmath>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"
#include "glauberlab/spin/hamiltonian.hpp"
#include "glauberlab/spin/io.hpp"
#include "glauberlab/spin/random.hpp"
#include "glauberlab/spin/smoothness.hpp"

using namespace glauberlab;
using namespace glauberlab::spin;

namespace {

SpinHamiltonian random_cubic(int n, std::uint64_t seed, double scale = 0.3) {
  return random_hamiltonian({n, 3, CoefficientLaw::gaussian, scale, 1.0}, seed);
}

std::vector<double> random_interior(int n, CounterRng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-0.9, 0.9);
  return x;
}

}  // namespace

TEST_CASE("parity and constant tables transform to single coefficients") {
  const std::vector<double> parity{1, -1, -1, 1};
  const SpinHamiltonian h = fourier_transform(parity);
  CHECK(h.n() == 2);
  CHECK(h.terms().size() == 1);
  CHECK(h.coefficient({1, 2}) == doctest::Approx(1.0));

  const std::vector<double> constant{3, 3};
  const SpinHamiltonian c = fourier_transform(constant);
  CHECK(c.coefficient({}) == doctest::Approx(3.0));
  CHECK(c.terms().size() == 1);

  CHECK_THROWS_AS(fourier_transform(std::vector<double>{1, 2, 3}), DimensionError);
}

TEST_CASE("corner table agrees with direct evaluation and inverts the transform") {
  CounterRng rng(11);
  for (int n : {1, 3, 5}) {
    std::vector<double> table(std::size_t{1} << n);
    for (double& v : table) v = rng.normal();
    const SpinHamiltonian h = fourier_transform(table);
    const std::vector<double> back = corner_table(h);
    for (std::size_t x = 0; x < table.size(); ++x) {
      const Spins s = spins_from_index(n, x);
      CHECK(evaluate_corner(h, s) == doctest::Approx(table[x]).epsilon(1e-10));
      CHECK(back[x] == doctest::Approx(table[x]).epsilon(1e-10));
    }
  }
}

TEST_CASE("corner index puts site 1 in the top bit with minus as a set bit") {
  CHECK(spins_from_index(3, 0) == Spins{1, 1, 1});
  CHECK(spins_from_index(3, 4) == Spins{-1, 1, 1});
  CHECK(spins_from_index(3, 1) == Spins{1, 1, -1});
  CHECK(index_from_spins(Spins{-1, 1, -1}) == 5);
}

TEST_CASE("multilinear extension matches product-Bernoulli averages") {
  const SpinHamiltonian h(2, {{{1, 2}, 1.0}});
  const std::vector<double> x{0.5, 0.5};
  CHECK(evaluate(h, x) == doctest::Approx(0.25));
  CHECK(evaluate(h, std::vector<double>{0.0, 0.0}) == 0.0);

  CounterRng rng(5);
  const int draws = 400000;
  double sum = 0.0;
  for (int t = 0; t < draws; ++t) {
    const int s1 = rng.uniform() < 0.75 ? 1 : -1;
    const int s2 = rng.uniform() < 0.75 ? 1 : -1;
    sum += s1 * s2;
  }
  // Var(s1 s2) = 1 - 0.25^2, so 5 standard errors is about 0.0077.
  CHECK(std::abs(sum / draws - 0.25) < 5.0 * std::sqrt((1.0 - 0.0625) / draws));

  const SpinHamiltonian cubic = random_cubic(4, 3);
  CHECK(evaluate(cubic, std::vector<double>(4, 0.0)) == doctest::Approx(cubic.coefficient({})));
  CHECK_THROWS_AS(evaluate(cubic, std::vector<double>{0.0, 1.1, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(evaluate(cubic, std::vector<double>{0.0, 0.0}), DimensionError);
  CHECK_NOTHROW(evaluate(cubic, std::vector<double>{0.0, 1.0 + 1e-13, 0.0, 0.0}));
}

TEST_CASE("cavity field differentiates the extension") {
  const SpinHamiltonian h(2, {{{1, 2}, 1.0}, {{1}, 0.7}});
  CHECK(cavity_field(h, 1, Spins{1, -1}) == doctest::Approx(-1.0 + 0.7));
  CHECK(cavity_field(h, 1, Spins{-1, 1}) == doctest::Approx(1.0 + 0.7));
  const SpinHamiltonian no_three(3, {{{1, 2}, 1.0}});
  CHECK(cavity_field(no_three, 3, Spins{1, 1, 1}) == 0.0);

  CounterRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const SpinHamiltonian r = random_cubic(6, 100 + trial);
    Spins s(6);
    for (int& v : s) v = rng() >> 63 ? -1 : 1;
    for (int j = 1; j <= 6; ++j) {
      const double before = cavity_field(r, j, s);
      s[j - 1] = -s[j - 1];
      CHECK(cavity_field(r, j, s) == doctest::Approx(before).epsilon(1e-14));
      s[j - 1] = -s[j - 1];
    }
    std::vector<double> x = random_interior(6, rng);
    const int j = 1 + static_cast<int>(rng.below(6));
    const double step = 1e-5;
    std::vector<double> up = x;
    std::vector<double> down = x;
    up[j - 1] += step;
    down[j - 1] -= step;
    const double fd = (evaluate(r, up) - evaluate(r, down)) / (2 * step);
    CHECK(std::abs(cavity_field(r, j, x) - fd) < 1e-7);
  }
}

TEST_CASE("hessian examples and finite differences") {
  const SpinHamiltonian pair(2, {{{1, 2}, 0.1}});
  const Matrix hp = hessian(pair, std::vector<double>{0.3, -0.2});
  CHECK(hp(0, 1) == doctest::Approx(0.1));
  CHECK(hp(1, 0) == doctest::Approx(0.1));
  CHECK(op_norm_symmetric(hp) == doctest::Approx(0.1));
  const SpinHamiltonian linear(3, {{{1}, 0.4}, {{3}, -2.0}});
  CHECK(hessian(linear, std::vector<double>{0.1, 0.2, 0.3}).isZero());

  CounterRng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const SpinHamiltonian h = random_cubic(5, 200 + trial, 0.5);
    const std::vector<double> x = random_interior(5, rng);
    const Matrix hess = hessian(h, x);
    const Vector grad = gradient(h, x);
    const double step = 1e-4;
    for (int i = 0; i < 5; ++i) {
      CHECK(hess(i, i) == 0.0);
      std::vector<double> up = x;
      std::vector<double> down = x;
      up[i] += step;
      down[i] -= step;
      CHECK(std::abs(grad[i] - (evaluate(h, up) - evaluate(h, down)) / (2 * step)) < 1e-6);
      const Vector dg = (gradient(h, up) - gradient(h, down)) / (2 * step);
      for (int j = 0; j < 5; ++j) CHECK(std::abs(hess(i, j) - dg[j]) < 1e-6);
    }
  }
}

TEST_CASE("degree-one terms leave the hessian unchanged") {
  CounterRng rng(29);
  const SpinHamiltonian h = random_cubic(5, 31);
  std::map<SiteSet, double> tilted = h.terms();
  for (int i = 1; i <= 5; ++i) tilted[{i}] += rng.normal();
  const SpinHamiltonian g(5, tilted);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> x = random_interior(5, rng);
    CHECK((hessian(h, x) - hessian(g, x)).isZero(0.0));
    CHECK(!(gradient(h, x) - gradient(g, x)).isZero(1e-12));
  }
  CHECK(smoothness_beta_exhaustive(h).beta == smoothness_beta_exhaustive(g).beta);
}

TEST_CASE("smoothness of an Ising model is the coupling norm") {
  // Coupling and norm computed independently with numpy.linalg.eigvalsh.
  Matrix j(3, 3);
  j << 0.0, 0.3, -0.1, 0.3, 0.0, 0.25, -0.1, 0.25, 0.0;
  const double numpy_norm = 0.4431153681075526;
  Vector field(3);
  field << 1.5, -0.2, 0.0;
  const SpinHamiltonian h = ising(j, field);
  const SmoothnessReport report = smoothness_beta_exhaustive(h);
  CHECK(report.method == SmoothnessMethod::exhaustive);
  CHECK(report.beta == doctest::Approx(numpy_norm).epsilon(1e-12));
  CHECK(t_constant(h) == doctest::Approx(numpy_norm).epsilon(1e-12));
}

TEST_CASE("triple product has smoothness 2 at every corner") {
  // Hessian at s is [[0,s3,s2],[s3,0,s1],[s2,s1,0]] with eigenvalues {2,-1,-1}
  // up to sign for every corner.
  const SpinHamiltonian h(3, {{{1, 2, 3}, 1.0}});
  for (std::uint64_t x = 0; x < 8; ++x)
    CHECK(op_norm_symmetric(hessian_at_corner(h, spins_from_index(3, x))) == doctest::Approx(2.0));
  CHECK(smoothness_beta_exhaustive(h).beta == doctest::Approx(2.0));
  CHECK(t_constant(h) == doctest::Approx(2.0));
}

TEST_CASE("sampled smoothness never exceeds the exhaustive value") {
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 4 + trial % 7;
    const SpinHamiltonian h = random_cubic(n, 300 + trial);
    const SmoothnessReport exact = smoothness_beta_exhaustive(h);
    const SmoothnessReport sampled = smoothness_beta_sampled(h, 10, trial);
    CHECK(sampled.method == SmoothnessMethod::sampled_lower_bound);
    CHECK(sampled.beta <= exact.beta + 1e-12);
    CHECK(op_norm_symmetric(hessian_at_corner(h, sampled.argmax_corner)) == doctest::Approx(sampled.beta));
  }
}

TEST_CASE("pinning substitutes spins and kills zeroed terms") {
  const SpinHamiltonian h(3, {{{1, 2, 3}, 1.0}});
  const PinnedHamiltonian a = pin(h, {{3}, {1}, {}});
  CHECK(a.free_sites == std::vector<int>{1, 2});
  CHECK(a.hamiltonian.terms() == std::map<SiteSet, double>{{{1, 2}, 1.0}});
  const PinnedHamiltonian b = pin(h, {{}, {}, {3}});
  CHECK(b.hamiltonian.terms().empty());
  CHECK_THROWS_AS(pin(h, {{2}, {1}, {2}}), DomainError);
  CHECK_THROWS_AS(pin(h, {{2}, {}, {}}), DimensionError);
}

TEST_CASE("pinned evaluations agree with the embedded point") {
  CounterRng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8;
    const SpinHamiltonian h = random_cubic(n, 400 + trial);
    PinningContext ctx;
    std::vector<double> point(n, 0.0);
    for (int i = 1; i <= n; ++i) {
      const auto label = rng.below(3);
      if (label == 0) {
        ctx.pinned.push_back(i);
        ctx.pinned_spins.push_back(rng() >> 63 ? -1 : 1);
        point[i - 1] = ctx.pinned_spins.back();
      } else if (label == 1) {
        ctx.zeroed.push_back(i);
      }
    }
    const PinnedHamiltonian p = pin(h, ctx);
    const int m = p.hamiltonian.n();
    for (int rep = 0; rep < 4; ++rep) {
      Spins free(m);
      for (int a = 0; a < m; ++a) {
        free[a] = rng() >> 63 ? -1 : 1;
        point[p.free_sites[a] - 1] = free[a];
      }
      CHECK(std::abs(evaluate_corner(p.hamiltonian, free) - evaluate(h, point)) <= 1e-12);
      for (int a = 0; a < m; ++a)
        CHECK(std::abs(cavity_field(p.hamiltonian, a + 1, free) - cavity_field(h, p.free_sites[a], point)) <= 1e-12);
    }
  }
}

TEST_CASE("pinning composes over disjoint contexts") {
  const SpinHamiltonian h = random_cubic(7, 77);
  const PinningContext first{{2, 5}, {1, -1}, {7}};
  const PinnedHamiltonian p1 = pin(h, first);
  // Remaining original sites are 1,3,4,6; pin local 2 (site 3) to -1, zero local 4 (site 6).
  const PinnedHamiltonian p2 = pin(p1.hamiltonian, {{2}, {-1}, {4}});
  const PinnedHamiltonian merged = pin(h, {{2, 3, 5}, {1, -1, -1}, {6, 7}});
  CHECK(merged.free_sites == std::vector<int>{1, 4});
  REQUIRE(p2.hamiltonian.terms().size() == merged.hamiltonian.terms().size());
  for (const auto& [sites, coeff] : merged.hamiltonian.terms())
    CHECK(p2.hamiltonian.coefficient(sites) == doctest::Approx(coeff).epsilon(1e-14));
}

TEST_CASE("T equals smoothness on small random instances") {
  const SpinHamiltonian linear(4, {{{1}, 1.0}, {{2}, -0.5}});
  CHECK(t_constant(linear) == 0.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial % 4;
    const SpinHamiltonian h = random_cubic(n, 500 + trial);
    CHECK(std::abs(t_constant(h) - smoothness_beta_exhaustive(h).beta) <= 1e-9);
  }
  CHECK_THROWS_AS(t_constant(SpinHamiltonian(13)), SizeError);
}

TEST_CASE("hamiltonian json round trip and strict parsing") {
  const SpinHamiltonian h(3, {{{1, 3}, 0.5}, {{2}, -1.25}});
  CHECK(hamiltonian_from_json(to_json(h)) == h);
  using nlohmann::json;
  CHECK_THROWS_AS(hamiltonian_from_json(json::parse(R"({"n":3,"terms":[{"sites":[2,1],"coeff":1}]})")), ParseError);
  CHECK_THROWS_AS(
      hamiltonian_from_json(json::parse(R"({"n":3,"terms":[{"sites":[1],"coeff":1},{"sites":[1],"coeff":2}]})")),
      ParseError);
  CHECK_THROWS_AS(hamiltonian_from_json(json::parse(R"({"n":2,"terms":[{"sites":[3],"coeff":1}]})")), ParseError);
  CHECK_THROWS_AS(hamiltonian_from_json(json::parse(R"({"n":2,"terms":[],"extra":1})")), ParseError);
}
