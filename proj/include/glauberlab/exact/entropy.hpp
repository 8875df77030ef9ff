#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"

namespace glauberlab::exact {

/// E[f log f] - E f log E f, evaluated as F * sum mu_x phi(f_x/F - 1) with
/// phi(d) = (1+d) log(1+d) - d to avoid cancellation near constant f.
double entropy_functional(const ExactGibbsTable& table, std::span<const double> f);

/// Sum over sites v of E_mu[Ent_v f], using the exact one-site conditionals.
double site_entropy_sum(const ExactGibbsTable& table, std::span<const double> f);

struct SearchOptions {
  int restarts = 16;
  int iters = 300;
  std::uint64_t seed = 1;
};

struct SearchResult {
  double value = 0.0;
  /// Best f found, normalized to E_mu f = 1.
  std::vector<double> witness;
  int evaluations = 0;
};

/// Lower bound on the approximate-tensorization constant: the largest
/// Ent(f) / site_entropy_sum(f) reached by gradient ascent from random and
/// point-mass starts. Not a certificate. n <= 10.
SearchResult at_constant_search(const ExactGibbsTable& table, const SearchOptions& opts = {});

/// Upper bound on the modified log-Sobolev constant: the smallest
/// E_P(f, log f) / Ent(f) reached by descent from random starts and from
/// small perturbations along the slowest eigenvector. Not a certificate.
SearchResult mlsi_search(const ExactGibbsTable& table, const WalkOperator& op, const SearchOptions& opts = {});

double mlsi_ratio(const ExactGibbsTable& table, const WalkOperator& op, std::span<const double> f);

struct ComparisonReport {
  int trials = 0;
  int violations = 0;
  /// min over trials of exp(2|W|_inf) Ent_base(f) - Ent_mu(f).
  double min_slack = 0.0;
  double w_sup = 0.0;
};

/// Checks Ent_mu f <= exp(2 |W|_inf) Ent_base f for mu proportional to
/// base * exp(W) on random nonnegative f. A violation exceeds `tolerance`.
ComparisonReport comparison_check(const ExactGibbsTable& base, std::span<const double> w, int trials,
                                  std::uint64_t seed, double tolerance = 1e-9);

}  // namespace glauberlab::exact
