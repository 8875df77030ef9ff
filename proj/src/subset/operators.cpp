#include "glauberlab/subset/operators.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include "glauberlab/common/errors.hpp"

namespace glauberlab::subset {

namespace {

struct Superset {
  int state;
  double weight;
};

struct LowerSet {
  std::vector<Superset> supersets;
  double mass = 0.0;
};

// Every l-subset of a support set, mapped to the support sets containing it.
std::unordered_map<Mask, LowerSet> lower_sets(const SubsetDistribution& mu, int l) {
  std::unordered_map<Mask, LowerSet> out;
  const auto& support = mu.support();
  for (std::size_t s = 0; s < support.size(); ++s) {
    const double w = mu.weights().at(support[s]);
    for (Mask t : k_subsets_of(support[s], l)) {
      auto& entry = out[t];
      entry.supersets.push_back({static_cast<int>(s), w});
      entry.mass += w;
    }
  }
  return out;
}

std::vector<Mask> sorted_keys(const std::unordered_map<Mask, LowerSet>& m) {
  std::vector<Mask> keys;
  keys.reserve(m.size());
  for (const auto& [t, entry] : m) keys.push_back(t);
  std::sort(keys.begin(), keys.end());
  return keys;
}

Eigen::Index index_of(const std::vector<Mask>& sorted, Mask s) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), s);
  if (it == sorted.end() || *it != s) throw DomainError("set not present in the state space");
  return it - sorted.begin();
}

void check_levels(const SubsetDistribution& mu, int k, int l) {
  if (k != mu.level()) throw DomainError("k must equal the level of the distribution");
  if (l < 0 || l > k) throw DomainError("lower level must lie in 0..k");
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, std::vector<Eigen::Triplet<double>>& trips) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

LevelOperator down_operator(int n, int k, int l) {
  if (!(n >= k && k >= l && l >= 0)) throw DomainError("down operator needs n >= k >= l >= 0");
  if (n > 62) throw DomainError("ground size must be at most 62");
  LevelOperator op;
  op.from_level = k;
  op.to_level = l;
  op.row_sets = k_subsets(n, k);
  op.col_sets = k_subsets(n, l);
  const double entry = 1.0 / binomial(k, l);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < op.row_sets.size(); ++r)
    for (Mask t : k_subsets_of(op.row_sets[r], l)) trips.emplace_back(r, index_of(op.col_sets, t), entry);
  op.matrix = from_triplets(op.row_sets.size(), op.col_sets.size(), trips);
  return op;
}

LevelOperator up_operator(const SubsetDistribution& mu, int l, int k) {
  check_levels(mu, k, l);
  const auto lower = lower_sets(mu, l);
  LevelOperator op;
  op.from_level = l;
  op.to_level = k;
  op.row_sets = sorted_keys(lower);
  op.col_sets = mu.support();
  for (Mask t : k_subsets(mu.ground_size(), l))
    if (!lower.contains(t)) op.unreachable.push_back(t);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < op.row_sets.size(); ++r) {
    const auto& entry = lower.at(op.row_sets[r]);
    for (const auto& sup : entry.supersets) trips.emplace_back(r, sup.state, sup.weight / entry.mass);
  }
  op.matrix = from_triplets(op.row_sets.size(), op.col_sets.size(), trips);
  return op;
}

exact::WalkOperator down_up_walk(const SubsetDistribution& mu, int k, int l) {
  check_levels(mu, k, l);
  const auto lower = lower_sets(mu, l);
  const auto& support = mu.support();
  const double down = 1.0 / binomial(k, l);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t s = 0; s < support.size(); ++s) {
    for (Mask t : k_subsets_of(support[s], l)) {
      const auto& entry = lower.at(t);
      for (const auto& sup : entry.supersets) trips.emplace_back(s, sup.state, down * sup.weight / entry.mass);
    }
  }
  exact::WalkOperator op;
  op.matrix = from_triplets(support.size(), support.size(), trips);
  const std::vector<double> p = mu.probabilities();
  op.stationary = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  op.kind = exact::WalkKind::down_up;
  return op;
}

exact::WalkOperator up_down_walk(const SubsetDistribution& mu, int l, int k, std::vector<Mask>* states) {
  check_levels(mu, k, l);
  const auto lower = lower_sets(mu, l);
  const std::vector<Mask> rows = sorted_keys(lower);
  const auto& support = mu.support();
  const double down = 1.0 / binomial(k, l);
  std::vector<Eigen::Triplet<double>> trips;
  Vector stationary(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& entry = lower.at(rows[r]);
    stationary[r] = entry.mass * down / mu.total();
    for (const auto& sup : entry.supersets)
      for (Mask t : k_subsets_of(support[sup.state], l))
        trips.emplace_back(r, index_of(rows, t), down * sup.weight / entry.mass);
  }
  exact::WalkOperator op;
  op.matrix = from_triplets(rows.size(), rows.size(), trips);
  op.stationary = stationary;
  op.kind = exact::WalkKind::up_down;
  if (states != nullptr) *states = rows;
  return op;
}

bool is_ergodic(const exact::WalkOperator& op) {
  const auto dim = op.dim();
  if (dim == 0) return false;
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Eigen::Index count = 1;
  while (!frontier.empty()) {
    const auto x = frontier.front();
    frontier.pop();
    for (SparseMatrix::InnerIterator it(op.matrix, x); it; ++it) {
      if (it.value() > 0.0 && !seen[it.col()]) {
        seen[it.col()] = true;
        ++count;
        frontier.push(it.col());
      }
    }
  }
  return count == dim;
}

double dirichlet_covariance_form(const SubsetDistribution& mu, std::span<const double> f,
                                 std::span<const double> g) {
  const auto& support = mu.support();
  if (f.size() != support.size() || g.size() != support.size())
    throw DimensionError("functions must be indexed by the support");
  const int k = mu.level();
  if (k < 1) throw DomainError("level must be at least 1");
  const auto lower = lower_sets(mu, k - 1);
  std::vector<double> terms;
  terms.reserve(lower.size());
  for (Mask t : sorted_keys(lower)) {
    const auto& entry = lower.at(t);
    double fm = 0.0;
    double gm = 0.0;
    for (const auto& sup : entry.supersets) {
      fm += sup.weight * f[sup.state];
      gm += sup.weight * g[sup.state];
    }
    fm /= entry.mass;
    gm /= entry.mass;
    double cov = 0.0;
    for (const auto& sup : entry.supersets) cov += sup.weight * (f[sup.state] - fm) * (g[sup.state] - gm);
    // mu D(t) = mass / (k total); the conditional law divides by mass.
    terms.push_back(cov / (k * mu.total()));
  }
  return pairwise_sum(terms);
}

}  // namespace glauberlab::subset
