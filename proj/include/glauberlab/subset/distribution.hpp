#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glauberlab/common/combinatorics.hpp"
#include "glauberlab/exact/gibbs.hpp"

namespace glauberlab::subset {

/// Nonnegative weights on k-subsets of {0..n-1}. Subsets are bitmasks with
/// ground element i at bit i. Zero weights are dropped, so the stored keys
/// are exactly the support.
class SubsetDistribution {
 public:
  SubsetDistribution(int ground_size, int level, const std::map<Mask, double>& weights);

  int ground_size() const noexcept { return n_; }
  int level() const noexcept { return k_; }
  const std::map<Mask, double>& weights() const noexcept { return weights_; }
  double total() const noexcept { return total_; }
  double probability(Mask s) const;

  /// Support sets in increasing mask order; walk states use this order.
  const std::vector<Mask>& support() const noexcept { return support_; }
  std::vector<double> probabilities() const;

  /// Marginal mass sum_{S containing t} mu(S) / total.
  double marginal(Mask t) const;

 private:
  int n_;
  int k_;
  std::map<Mask, double> weights_;
  std::vector<Mask> support_;
  double total_ = 0.0;
};

/// Conditional distribution of S \ T given T in S, on the same ground set.
SubsetDistribution link(const SubsetDistribution& mu, Mask t);

/// Spin measure as a distribution on n-subsets of a 2n ground set: site i
/// (0-based) with spin +1 is element 2i, with spin -1 element 2i+1.
SubsetDistribution homogenize(const exact::ExactGibbsTable& table);
Mask homogenized_set(int n, std::uint64_t corner_index);

/// Exp(1) weights on every k-subset; the sparse variant zeroes each weight
/// with probability 1/2 (at least one weight is kept).
SubsetDistribution random_distribution(int n, int k, std::uint64_t seed, bool sparse = false);

/// Sum_S mu(S) prod_{i in S} z_i with unnormalized weights.
double generating_polynomial_eval(const SubsetDistribution& mu, std::span<const double> z);

/// Hessian of log g(z_1^alpha, ..., z_n^alpha) at z > 0, by enumeration.
Matrix log_generating_hessian(const SubsetDistribution& mu, std::span<const double> z, double alpha);

nlohmann::json to_json(const SubsetDistribution& mu);
SubsetDistribution distribution_from_json(const nlohmann::json& j);
SubsetDistribution read_distribution(const std::string& path);

}  // namespace glauberlab::subset
