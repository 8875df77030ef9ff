#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"
#include "glauberlab/exact/correlation.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"
#include "glauberlab/spin/random.hpp"
#include "glauberlab/subset/checks.hpp"
#include "glauberlab/subset/distribution.hpp"
#include "glauberlab/subset/operators.hpp"

using namespace glauberlab;
using namespace glauberlab::subset;

namespace {

Mask set_of(std::initializer_list<int> one_based) {
  Mask s = 0;
  for (int e : one_based) s |= Mask{1} << (e - 1);
  return s;
}

SubsetDistribution uniform(int n, int k) {
  std::map<Mask, double> w;
  for (Mask s : k_subsets(n, k)) w.emplace(s, 1.0);
  return SubsetDistribution(n, k, w);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector row_sums(const SparseMatrix& m) { return Matrix(m).rowwise().sum(); }

}  // namespace

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(SubsetDistribution(3, 2, {{set_of({1}), 1.0}}), DomainError);
  CHECK_THROWS_AS(SubsetDistribution(3, 1, {{set_of({4}), 1.0}}), DomainError);
  CHECK_THROWS_AS(SubsetDistribution(3, 1, {{set_of({1}), -1.0}}), DomainError);
  CHECK_THROWS_AS(SubsetDistribution(3, 1, {{set_of({1}), 0.0}}), DomainError);
  const SubsetDistribution mu(3, 1, {{set_of({1}), 2.0}, {set_of({2}), 0.0}, {set_of({3}), 6.0}});
  CHECK(mu.support().size() == 2);
  CHECK(mu.probability(set_of({3})) == doctest::Approx(0.75));
  CHECK(mu.probability(set_of({2})) == 0.0);
}

TEST_CASE("down operator") {
  const LevelOperator d = down_operator(3, 2, 1);
  const Matrix m(d.matrix);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      CHECK(m(r, c) == ((d.row_sets[r] & d.col_sets[c]) == d.col_sets[c] ? 0.5 : 0.0));

  const LevelOperator same = down_operator(4, 2, 2);
  CHECK(max_abs(Matrix(same.matrix) - Matrix::Identity(6, 6)) == 0.0);

  const Matrix d32(down_operator(4, 3, 2).matrix);
  const Matrix d21(down_operator(4, 2, 1).matrix);
  const Matrix d31(down_operator(4, 3, 1).matrix);
  CHECK(max_abs(d32 * d21 - d31) <= 1e-14);
  CHECK(max_abs(Matrix(down_operator(6, 4, 2).matrix) * Matrix(down_operator(6, 2, 0).matrix) -
                Matrix(down_operator(6, 4, 0).matrix)) <= 1e-13);
  CHECK(max_abs(row_sums(down_operator(7, 4, 2).matrix) - Vector::Ones(35)) <= 1e-12);
  CHECK_THROWS_AS(down_operator(3, 4, 1), DomainError);
}

TEST_CASE("up operator") {
  const LevelOperator u = up_operator(uniform(3, 2), 1, 2);
  const Matrix m(u.matrix);
  for (Eigen::Index r = 0; r < 3; ++r) {
    int halves = 0;
    for (Eigen::Index c = 0; c < 3; ++c) halves += m(r, c) == doctest::Approx(0.5) ? 1 : 0;
    CHECK(halves == 2);
  }
  CHECK(u.unreachable.empty());

  const SubsetDistribution point(4, 2, {{set_of({1, 3}), 1.0}});
  const LevelOperator pu = up_operator(point, 1, 2);
  CHECK(pu.row_sets.size() == 2);
  CHECK(pu.unreachable.size() == 2);
  CHECK(max_abs(Matrix(pu.matrix) - Matrix::Ones(2, 1)) == 0.0);
  CHECK_THROWS_AS(up_operator(point, 1, 3), DomainError);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SubsetDistribution mu = random_distribution(5, 3, seed);
    const LevelOperator up = up_operator(mu, 1, 3);
    CHECK(max_abs(row_sums(up.matrix) - Vector::Ones(up.matrix.rows())) <= 1e-12);
    // mu D_{3->1}: columns of D are all 1-subsets, and all are reachable here.
    const LevelOperator down = down_operator(5, 3, 1);
    Vector mu_full = Vector::Zero(static_cast<Eigen::Index>(down.row_sets.size()));
    for (std::size_t r = 0; r < down.row_sets.size(); ++r) mu_full[r] = mu.probability(down.row_sets[r]);
    const Vector lower = Matrix(down.matrix).transpose() * mu_full;
    const Vector back = Matrix(up.matrix).transpose() * lower;
    const std::vector<double> p = mu.probabilities();
    for (std::size_t s = 0; s < p.size(); ++s) CHECK(std::abs(back[s] - p[s]) <= 1e-12);
  }
}

TEST_CASE("walks on uniform C(3,2)") {
  const exact::WalkOperator w = down_up_walk(uniform(3, 2), 2, 1);
  const Matrix m(w.matrix);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(m(r, c) == doctest::Approx(r == c ? 0.5 : 0.25));
  const exact::WalkOperator ident = down_up_walk(uniform(4, 2), 2, 2);
  CHECK(max_abs(Matrix(ident.matrix) - Matrix::Identity(6, 6)) <= 1e-15);
  CHECK(exact::second_eigenvalue(up_down_walk(uniform(3, 2), 1, 2)) == doctest::Approx(0.25));
}

TEST_CASE("walks are reversible with nonnegative spectra and the right stationary law") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const int n = 5 + static_cast<int>(seed % 3);
    const int k = 2 + static_cast<int>(seed % 3);
    const SubsetDistribution mu = random_distribution(n, k, seed, seed % 2 == 0);
    for (int l = 0; l < k; ++l) {
      const exact::WalkOperator du = down_up_walk(mu, k, l);
      const exact::WalkOperator ud = up_down_walk(mu, l, k);
      CHECK_NOTHROW(exact::check_walk(du, 1e-12));
      CHECK_NOTHROW(exact::check_walk(ud, 1e-12));
      CHECK((Matrix(du.matrix).transpose() * du.stationary - du.stationary).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((Matrix(ud.matrix).transpose() * ud.stationary - ud.stationary).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(exact::walk_eigenvalues(du).minCoeff() >= -1e-10);
      CHECK(exact::walk_eigenvalues(ud).minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("links") {
  const SubsetDistribution mu = random_distribution(6, 3, 4);
  const SubsetDistribution at_empty = link(mu, 0);
  CHECK(at_empty.weights() == mu.weights());

  const SubsetDistribution l = link(uniform(4, 2), set_of({1}));
  CHECK(l.level() == 1);
  CHECK(l.support() == std::vector<Mask>{set_of({2}), set_of({3}), set_of({4})});
  for (Mask s : l.support()) CHECK(l.probability(s) == doctest::Approx(1.0 / 3.0));

  const SubsetDistribution ab = link(link(mu, set_of({2})), set_of({5}));
  const SubsetDistribution direct = link(mu, set_of({2, 5}));
  REQUIRE(ab.support() == direct.support());
  for (Mask s : ab.support()) CHECK(std::abs(ab.probability(s) - direct.probability(s)) <= 1e-12);

  CHECK_THROWS_AS(link(SubsetDistribution(4, 2, {{set_of({1, 2}), 1.0}}), set_of({3})), DomainError);
}

TEST_CASE("subset correlation matrices") {
  const exact::CorrelationMatrix u = correlation_matrix_subset(uniform(3, 2));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(u.entries(a, b) == doctest::Approx(a == b ? 1.0 / 3.0 : -1.0 / 6.0));
  CHECK(u.lambda_max == doctest::Approx(0.5));

  const SubsetDistribution level1(4, 1, {{set_of({1}), 1.0}, {set_of({2}), 2.0}, {set_of({3}), 3.0}, {set_of({4}), 4.0}});
  const exact::CorrelationMatrix c1 = correlation_matrix_subset(level1);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double pb = (b + 1) / 10.0;
      CHECK(c1.entries(a, b) == doctest::Approx((a == b ? 1.0 : 0.0) - pb));
    }
  CHECK(c1.lambda_max <= 1.0 + 1e-12);

  const exact::CorrelationMatrix point = correlation_matrix_subset(SubsetDistribution(5, 2, {{set_of({2, 4}), 1.0}}));
  CHECK(point.elements == std::vector<int>{1, 3});
  CHECK(max_abs(point.entries) == 0.0);
}

TEST_CASE("local spectral identity") {
  const LocalIdentityReport u = si_local_identity_check(uniform(3, 2));
  CHECK(u.lambda2 == doctest::Approx(0.25));
  CHECK(u.lambda_max == doctest::Approx(0.5));
  CHECK(u.pass);

  const SubsetDistribution one(4, 1, {{set_of({1}), 1.0}, {set_of({2}), 3.0}, {set_of({4}), 0.5}});
  const LocalIdentityReport r1 = si_local_identity_check(one);
  CHECK(std::abs(r1.lambda2 - r1.lambda_max) <= 1e-12);

  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const LocalIdentityReport r = si_local_identity_check(random_distribution(6, 3, seed, seed % 3 == 0));
    worst = std::max(worst, r.deviation);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("lazy and active walks") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int k = 3 + static_cast<int>(seed % 2);
    const SubsetDistribution mu = random_distribution(7, k, 100 + seed);
    exact::WalkOperator lazy = up_down_walk(mu, 1, k);
    Matrix p(lazy.matrix);
    CHECK(p.diagonal().maxCoeff() >= 1.0 / k - 1e-12);
    Matrix active = p;
    active.diagonal().setZero();
    for (Eigen::Index r = 0; r < active.rows(); ++r) active.row(r) /= active.row(r).sum();
    exact::WalkOperator a = lazy;
    a.matrix = active.sparseView();
    const double expected = 1.0 / k + (k - 1.0) / k * exact::second_eigenvalue(a);
    CHECK(std::abs(exact::second_eigenvalue(lazy) - expected) <= 1e-10);
  }
}

TEST_CASE("trickle-down") {
  CHECK(trickledown_bound(1.0 / 3.0, 4) == doctest::Approx(0.25));
  CHECK(trickledown_bound(0.0, 5) == 0.0);
  CHECK_THROWS_AS(trickledown_bound(0.5, 2), DomainError);
  CHECK_THROWS_AS(trickledown_bound(1.0, 4), DomainError);

  int checked = 0;
  for (std::uint64_t seed = 1; checked < 100; ++seed) {
    const OppenheimReport r = oppenheim_verify(random_distribution(6, 3, seed, seed % 2 == 0));
    if (!r.applicable) continue;
    ++checked;
    CHECK(r.pass);
  }
  CHECK_FALSE(oppenheim_verify(uniform(4, 2)).applicable);
}

TEST_CASE("continuity bound") {
  CHECK(continuity_bound(1.0, 4) == doctest::Approx(1.0));
  CHECK(continuity_bound(1e-9, 5) < 1e-8);
  CHECK_THROWS_AS(continuity_bound(2.0, 4), DomainError);

  int checked = 0;
  for (std::uint64_t seed = 1; checked < 100 && seed < 1000; ++seed) {
    const ContinuityReport r = continuity_verify(random_distribution(6, 4, seed, seed % 2 == 0));
    if (!r.applicable) continue;
    ++checked;
    CHECK(r.pass);
  }
  CHECK(checked == 100);
}

TEST_CASE("spectral independence from the down-up gap at every level") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 4 + static_cast<int>(seed % 5);
    const int k = 1 + static_cast<int>(seed % static_cast<std::uint64_t>(n - 1));
    const SubsetDistribution mu = random_distribution(n, k, 300 + seed);
    const SpectralIndependenceReport r = poincare_to_si_check(mu);
    CHECK(r.pass);
    CounterRng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    CHECK(variance_contraction_check(mu, v).pass);
  }
}

TEST_CASE("dirichlet form equals expected conditional covariance") {
  CounterRng rng(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SubsetDistribution mu = random_distribution(6, 2 + static_cast<int>(seed % 3), 500 + seed);
    const exact::WalkOperator w = down_up_walk(mu, mu.level(), mu.level() - 1);
    std::vector<double> f(mu.support().size());
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = rng.normal();
      g[i] = rng.normal();
    }
    CHECK(std::abs(exact::dirichlet_form(w, f, g) - dirichlet_covariance_form(mu, f, g)) <= 1e-10);
  }
}

TEST_CASE("homogenization") {
  const SubsetDistribution one = homogenize(exact::gibbs_table(spin::SpinHamiltonian(1)));
  CHECK(one.ground_size() == 2);
  CHECK(one.support() == std::vector<Mask>{1, 2});
  for (Mask s : one.support()) CHECK(one.probability(s) == doctest::Approx(0.5));
  CHECK(homogenize(exact::gibbs_table(spin::SpinHamiltonian(2))).support().size() == 4);

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    const spin::SpinHamiltonian h =
        spin::random_hamiltonian({n, 3, spin::CoefficientLaw::gaussian, 0.6, 1.0}, 40 + seed);
    const exact::ExactGibbsTable t = exact::gibbs_table(h);
    const SubsetDistribution hom = homogenize(t);
    CHECK(std::abs(exact::spectral_independence_eta(t) - correlation_matrix_subset(hom).lambda_max) <= 1e-10);

    const Matrix glauber(exact::glauber_operator(t).matrix);
    const Matrix walk(down_up_walk(hom, n, n - 1).matrix);
    const auto& support = hom.support();
    std::vector<Eigen::Index> index(t.size());
    for (std::size_t x = 0; x < t.size(); ++x)
      index[x] = std::lower_bound(support.begin(), support.end(), homogenized_set(n, x)) - support.begin();
    double deviation = 0.0;
    for (std::size_t x = 0; x < t.size(); ++x)
      for (std::size_t y = 0; y < t.size(); ++y)
        deviation = std::max(deviation, std::abs(glauber(x, y) - walk(index[x], index[y])));
    CHECK(deviation <= 1e-12);
  }
}

TEST_CASE("generating polynomial and its log-Hessian") {
  const SubsetDistribution mu = random_distribution(5, 2, 8);
  CHECK(generating_polynomial_eval(mu, std::vector<double>(5, 1.0)) == doctest::Approx(mu.total()));
  const double alpha = 0.5;
  const std::vector<double> ones(5, 1.0);
  const Matrix analytic = log_generating_hessian(mu, ones, alpha);
  CHECK(max_abs(analytic - flc_matrix_from_correlation(mu, alpha)) <= 1e-10);

  // Central finite differences of log g(z^alpha) at z = 1.
  auto f = [&](std::vector<double> z) {
    for (double& v : z) v = std::pow(v, alpha);
    return std::log(generating_polynomial_eval(mu, z));
  };
  const double h = 1e-4;
  Matrix numeric(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      auto at = [&](double di, double dj) {
        std::vector<double> z(ones);
        z[i] += di;
        z[j] += dj;
        return f(z);
      };
      numeric(i, j) = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    }
  CHECK(max_abs(numeric - analytic) <= 1e-6);

  const SubsetDistribution point(4, 2, {{set_of({1, 2}), 1.0}});
  const Matrix degenerate = log_generating_hessian(point, std::vector<double>(4, 1.0), 0.7);
  CHECK(max_abs(degenerate - flc_matrix_from_correlation(point, 0.7)) <= 1e-12);
  CHECK(lambda_max_symmetric(degenerate) <= 1e-12);
  CHECK_THROWS_AS(log_generating_hessian(point, std::vector<double>{1.0, 0.0, 1.0, 1.0}, 0.5), DomainError);
}

TEST_CASE("distribution JSON") {
  const SubsetDistribution mu = random_distribution(6, 3, 12, true);
  const SubsetDistribution back = distribution_from_json(to_json(mu));
  CHECK(back.weights() == mu.weights());
  CHECK_THROWS_AS(distribution_from_json(nlohmann::json::parse(R"({"n":3,"k":1,"weights":[],"x":1})")), ParseError);
  CHECK_THROWS_AS(distribution_from_json(nlohmann::json::parse(R"({"n":3,"k":1,"weights":[{"set":[4],"w":1}]})")),
                  ParseError);
  CHECK_THROWS_AS(
      distribution_from_json(nlohmann::json::parse(R"({"n":3,"k":2,"weights":[{"set":[1,1],"w":1}]})")),
      ParseError);
}
