#pragma once

#include <span>
#include <vector>

#include "glauberlab/exact/walk.hpp"
#include "glauberlab/subset/distribution.hpp"

namespace glauberlab::subset {

/// Rectangular row-stochastic operator between levels.
struct LevelOperator {
  int from_level = 0;
  int to_level = 0;
  std::vector<Mask> row_sets;
  std::vector<Mask> col_sets;
  SparseMatrix matrix;
  /// Lower-level sets with zero marginal, removed from the rows of an up
  /// operator.
  std::vector<Mask> unreachable;
};

/// D(S, T) = 1/C(k, l) if T is a subset of S. Rows are all k-subsets of
/// [n], columns all l-subsets.
LevelOperator down_operator(int n, int k, int l);

/// U(T, S) = mu(S) / sum_{S' containing T} mu(S'). Rows are l-subsets with
/// positive marginal, columns the support of mu.
LevelOperator up_operator(const SubsetDistribution& mu, int l, int k);

/// k <-> l down-up walk D U on the support of mu, stationary mu.
exact::WalkOperator down_up_walk(const SubsetDistribution& mu, int k, int l);

/// l <-> k up-down walk U D on the l-sets with positive marginal, stationary
/// mu D. `states` receives the l-sets in row order when non-null.
exact::WalkOperator up_down_walk(const SubsetDistribution& mu, int l, int k, std::vector<Mask>* states = nullptr);

/// Connectivity of the transition graph.
bool is_ergodic(const exact::WalkOperator& op);

/// E_{T ~ mu D}[Cov(f, g | T)] for the k <-> k-1 down-up walk; f and g are
/// indexed by the support of mu.
double dirichlet_covariance_form(const SubsetDistribution& mu, std::span<const double> f,
                                 std::span<const double> g);

}  // namespace glauberlab::subset
