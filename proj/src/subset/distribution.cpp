#include "glauberlab/subset/distribution.hpp"

#include <cmath>
#include <fstream>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::subset {

SubsetDistribution::SubsetDistribution(int ground_size, int level, const std::map<Mask, double>& weights)
    : n_(ground_size), k_(level) {
  if (n_ < 0 || n_ > 62) throw DomainError("ground size must lie in 0..62");
  if (k_ < 0 || k_ > n_) throw DomainError("level must lie in 0..n");
  const Mask ground = n_ == 0 ? 0 : (Mask{1} << n_) - 1;
  for (const auto& [s, w] : weights) {
    if ((s & ~ground) != 0) throw DomainError("subset outside the ground set");
    if (popcount(s) != k_) throw DomainError("subset size differs from the level");
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
    if (w > 0.0) {
      weights_.emplace(s, w);
      support_.push_back(s);
      total_ += w;
    }
  }
  if (weights_.empty()) throw DomainError("distribution needs a positive weight");
}

double SubsetDistribution::probability(Mask s) const {
  const auto it = weights_.find(s);
  return it == weights_.end() ? 0.0 : it->second / total_;
}

std::vector<double> SubsetDistribution::probabilities() const {
  std::vector<double> p;
  p.reserve(support_.size());
  for (const auto& [s, w] : weights_) p.push_back(w / total_);
  return p;
}

double SubsetDistribution::marginal(Mask t) const {
  double m = 0.0;
  for (const auto& [s, w] : weights_)
    if ((s & t) == t) m += w;
  return m / total_;
}

SubsetDistribution link(const SubsetDistribution& mu, Mask t) {
  std::map<Mask, double> w;
  for (const auto& [s, weight] : mu.weights())
    if ((s & t) == t) w.emplace(s & ~t, weight);
  if (w.empty()) throw DomainError("link at a set with zero marginal");
  return SubsetDistribution(mu.ground_size(), mu.level() - popcount(t), w);
}

Mask homogenized_set(int n, std::uint64_t corner_index) {
  Mask s = 0;
  for (int i = 0; i < n; ++i) {
    const bool minus = (corner_index & spin::site_bit(n, i + 1)) != 0;
    s |= Mask{1} << (2 * i + (minus ? 1 : 0));
  }
  return s;
}

SubsetDistribution homogenize(const exact::ExactGibbsTable& table) {
  if (table.n > 14) throw SizeError("homogenize requires n <= 14");
  std::map<Mask, double> w;
  for (std::size_t x = 0; x < table.size(); ++x) w.emplace(homogenized_set(table.n, x), table.probs[x]);
  return SubsetDistribution(2 * table.n, table.n, w);
}

SubsetDistribution random_distribution(int n, int k, std::uint64_t seed, bool sparse) {
  CounterRng rng(seed, 0x5b5e7);
  const std::vector<Mask> sets = k_subsets(n, k);
  if (sets.empty()) throw DomainError("no k-subsets for the given n and k");
  std::map<Mask, double> w;
  for (Mask s : sets) {
    const bool drop = sparse && rng.uniform() < 0.5;
    const double v = rng.exponential();
    if (!drop) w.emplace(s, v);
  }
  if (w.empty()) w.emplace(sets[rng.below(sets.size())], 1.0);
  return SubsetDistribution(n, k, w);
}

double generating_polynomial_eval(const SubsetDistribution& mu, std::span<const double> z) {
  if (static_cast<int>(z.size()) != mu.ground_size()) throw DimensionError("one variable per ground element");
  double g = 0.0;
  for (const auto& [s, w] : mu.weights()) {
    double term = w;
    for (int i : mask_elements(s)) term *= z[i];
    g += term;
  }
  return g;
}

Matrix log_generating_hessian(const SubsetDistribution& mu, std::span<const double> z, double alpha) {
  const int n = mu.ground_size();
  if (static_cast<int>(z.size()) != n) throw DimensionError("one variable per ground element");
  for (double v : z)
    if (!(v > 0.0)) throw DomainError("z must be positive");
  double g = 0.0;
  Vector grad = Vector::Zero(n);
  Matrix hess = Matrix::Zero(n, n);
  for (const auto& [s, w] : mu.weights()) {
    const std::vector<int> elems = mask_elements(s);
    double term = w;
    for (int i : elems) term *= std::pow(z[i], alpha);
    g += term;
    for (int i : elems) {
      grad[i] += term * alpha / z[i];
      hess(i, i) += term * alpha * (alpha - 1.0) / (z[i] * z[i]);
      for (int j : elems)
        if (j != i) hess(i, j) += term * alpha * alpha / (z[i] * z[j]);
    }
  }
  return hess / g - (grad * grad.transpose()) / (g * g);
}

nlohmann::json to_json(const SubsetDistribution& mu) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& [s, w] : mu.weights()) {
    std::vector<int> set;
    for (int i : mask_elements(s)) set.push_back(i + 1);
    weights.push_back({{"set", set}, {"w", w}});
  }
  return {{"n", mu.ground_size()}, {"k", mu.level()}, {"weights", weights}};
}

SubsetDistribution distribution_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ParseError("distribution must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (key != "n" && key != "k" && key != "weights") throw ParseError("unknown distribution key '" + key + "'");
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();
    if (n < 0 || n > 62) throw ParseError("n must lie in 0..62");
    std::map<Mask, double> w;
    for (const auto& entry : j.at("weights")) {
      Mask s = 0;
      for (int e : entry.at("set").get<std::vector<int>>()) {
        if (e < 1 || e > n) throw ParseError("element " + std::to_string(e) + " out of range");
        if (s & (Mask{1} << (e - 1))) throw ParseError("repeated element in set");
        s |= Mask{1} << (e - 1);
      }
      if (!w.emplace(s, entry.at("w").get<double>()).second) throw ParseError("duplicate set in weights");
    }
    return SubsetDistribution(n, k, w);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("distribution: ") + e.what());
  }
}

SubsetDistribution read_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return distribution_from_json(j);
}

}  // namespace glauberlab::subset
