#include "glauberlab/pspin/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "glauberlab/common/combinatorics.hpp"
#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::pspin {

using nlohmann::json;

namespace {

constexpr int kStreamingMaxSites = 2048;
constexpr double kCubicCacheLimit = 2e7;

// Position of the sorted 0-based triple a < b < c in colexicographic order.
std::size_t triple_index(int a, int b, int c) {
  const auto b2 = static_cast<std::size_t>(b) * (b - 1) / 2;
  const auto c3 = static_cast<std::size_t>(c) * (c - 1) * (c - 2) / 6;
  return c3 + b2 + static_cast<std::size_t>(a);
}

double order_scale(const PSpinSpec& spec, int p) {
  const auto it = spec.betas.find(p);
  if (it == spec.betas.end()) return 0.0;
  return it->second / std::pow(static_cast<double>(spec.N), 0.5 * (p - 1));
}

// Visits every ordered tuple of p distinct sites in 1..n.
template <typename Visit>
void for_each_tuple(int n, int p, Visit&& visit) {
  std::vector<int> tuple(p);
  std::vector<bool> used(n + 1, false);
  auto rec = [&](auto& self, int depth) -> void {
    if (depth == p) {
      visit(std::span<const int>(tuple));
      return;
    }
    for (int s = 1; s <= n; ++s) {
      if (used[s]) continue;
      used[s] = true;
      tuple[depth] = s;
      self(self, depth + 1);
      used[s] = false;
    }
  };
  rec(rec, 0);
}

}  // namespace

void PSpinSpec::validate() const {
  if (N < 1) throw DomainError("N must be positive");
  for (const auto& [p, beta] : betas) {
    if (p < 2) throw DomainError("interaction order p must be at least 2");
    if (p > N) throw DomainError("interaction order exceeds N");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta_p must be finite and nonnegative");
  }
  if (!field.empty() && static_cast<int>(field.size()) != N) throw DimensionError("field must have length N");
  for (double v : field)
    if (!std::isfinite(v)) throw DomainError("field entries must be finite");
}

int PSpinSpec::max_order() const {
  int m = 0;
  for (const auto& [p, beta] : betas)
    if (beta != 0.0) m = std::max(m, p);
  return m;
}

double disorder(std::uint64_t seed, int p, std::span<const int> tuple) {
  const auto order = static_cast<std::uint64_t>(p);
  const std::uint64_t a = hash_words(hash_words({seed, order, 1}), tuple);
  const std::uint64_t b = hash_words(hash_words({seed, order, 2}), tuple);
  return normal_from_words(a, b);
}

double disorder_set_sum(std::uint64_t seed, std::span<const int> sorted_sites) {
  std::vector<int> perm(sorted_sites.begin(), sorted_sites.end());
  const int p = static_cast<int>(perm.size());
  double sum = 0.0;
  do {
    sum += disorder(seed, p, perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

double set_coefficient(const PSpinSpec& spec, std::span<const int> sorted_sites) {
  const double scale = order_scale(spec, static_cast<int>(sorted_sites.size()));
  return scale == 0.0 ? 0.0 : scale * disorder_set_sum(spec.seed, sorted_sites);
}

spin::SpinHamiltonian sample_pspin(const PSpinSpec& spec) {
  spec.validate();
  if (spec.N > kMaterializeMaxSites) throw SizeError("materialization requires N <= 24");
  if (spec.max_order() > kMaterializeMaxOrder) throw SizeError("materialization requires p <= 4");
  std::map<spin::SiteSet, double> terms;
  for (int i = 1; i <= spec.N; ++i)
    if (spec.field_at(i) != 0.0) terms[{i}] = spec.field_at(i);
  for (const auto& [p, beta] : spec.betas) {
    if (beta == 0.0) continue;
    for (Mask s : k_subsets(spec.N, p)) {
      spin::SiteSet sites;
      for (int e : mask_elements(s)) sites.push_back(e + 1);
      terms[sites] = set_coefficient(spec, sites);
    }
  }
  return spin::SpinHamiltonian(spec.N, std::move(terms));
}

double energy_by_tuples(const PSpinSpec& spec, std::span<const int> spins) {
  spec.validate();
  if (static_cast<int>(spins.size()) != spec.N) throw DimensionError("spins must have length N");
  double energy = 0.0;
  for (int i = 1; i <= spec.N; ++i) energy += spec.field_at(i) * spins[i - 1];
  for (const auto& [p, beta] : spec.betas) {
    if (beta == 0.0) continue;
    double sum = 0.0;
    for_each_tuple(spec.N, p, [&](std::span<const int> tuple) {
      double sign = 1.0;
      for (int s : tuple) sign *= spins[s - 1];
      sum += sign * disorder(spec.seed, p, tuple);
    });
    energy += order_scale(spec, p) * sum;
  }
  return energy;
}

TemperatureNorms temperature_norms(const PSpinSpec& spec) {
  TemperatureNorms t;
  for (const auto& [p, beta] : spec.betas) {
    if (p < 2) throw DomainError("interaction order p must be at least 2");
    const double base = std::pow(static_cast<double>(p), 3) * std::log(static_cast<double>(p));
    t.beta0 += std::sqrt(base) * beta;
    t.beta += std::sqrt(std::ldexp(base, p)) * beta;
  }
  return t;
}

double energy_variance(const PSpinSpec& spec) {
  spec.validate();
  double v = 0.0;
  for (const auto& [p, beta] : spec.betas) {
    double falling = 1.0;
    for (int r = 0; r < p; ++r) falling *= spec.N - r;
    v += beta * beta * falling / std::pow(static_cast<double>(spec.N), p - 1);
  }
  return v;
}

StreamingModel::StreamingModel(PSpinSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.max_order() > 3) throw SizeError("streaming evaluation supports p <= 3");
  if (spec_.N > kStreamingMaxSites) throw SizeError("streaming evaluation requires N <= 2048");
  const int n = spec_.N;
  coupling_ = Matrix::Zero(n, n);
  const double pair = order_scale(spec_, 2);
  if (pair != 0.0) {
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        const int sites[2] = {i, j};
        coupling_(i - 1, j - 1) = coupling_(j - 1, i - 1) = pair * disorder_set_sum(spec_.seed, sites);
      }
  }
  cubic_scale_ = order_scale(spec_, 3);
  if (cubic_scale_ != 0.0 && binomial(n, 3) <= kCubicCacheLimit) {
    cubic_cache_.resize(static_cast<std::size_t>(binomial(n, 3)));
    for (int c = 2; c < n; ++c)
      for (int b = 1; b < c; ++b)
        for (int a = 0; a < b; ++a) {
          const int sites[3] = {a + 1, b + 1, c + 1};
          cubic_cache_[triple_index(a, b, c)] = disorder_set_sum(spec_.seed, sites);
        }
  }
}

double StreamingModel::cubic(int i, int j, int k) const {
  int sites[3] = {i, j, k};
  std::sort(sites, sites + 3);
  if (!cubic_cache_.empty()) return cubic_cache_[triple_index(sites[0] - 1, sites[1] - 1, sites[2] - 1)];
  return disorder_set_sum(spec_.seed, sites);
}

double StreamingModel::field(int site, std::span<const int> spins) const {
  const int n = spec_.N;
  if (static_cast<int>(spins.size()) != n) throw DimensionError("spins must have length N");
  if (site < 1 || site > n) throw DomainError("site out of range");
  double b = spec_.field_at(site);
  for (int i = 0; i < n; ++i) b += coupling_(site - 1, i) * spins[i];
  if (cubic_scale_ != 0.0) {
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
      if (i == site) continue;
      for (int k = i + 1; k <= n; ++k) {
        if (k == site) continue;
        sum += cubic(i, k, site) * spins[i - 1] * spins[k - 1];
      }
    }
    b += cubic_scale_ * sum;
  }
  return b;
}

double StreamingModel::energy(std::span<const int> spins) const {
  const int n = spec_.N;
  if (static_cast<int>(spins.size()) != n) throw DimensionError("spins must have length N");
  double e = 0.0;
  for (int i = 1; i <= n; ++i) {
    e += spec_.field_at(i) * spins[i - 1];
    for (int j = i + 1; j <= n; ++j) e += coupling_(i - 1, j - 1) * spins[i - 1] * spins[j - 1];
  }
  if (cubic_scale_ != 0.0) {
    double sum = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) sum += cubic(i, j, k) * spins[i - 1] * spins[j - 1] * spins[k - 1];
    e += cubic_scale_ * sum;
  }
  return e;
}

json to_json(const PSpinSpec& spec) {
  json betas = json::object();
  for (const auto& [p, beta] : spec.betas) betas[std::to_string(p)] = beta;
  json j = {{"N", spec.N}, {"betas", betas}, {"seed", spec.seed}};
  j["h"] = spec.field.empty() ? std::vector<double>(spec.N, 0.0) : spec.field;
  return j;
}

PSpinSpec spec_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("p-spin spec must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (key != "N" && key != "betas" && key != "h" && key != "seed")
        throw ParseError("unknown p-spin spec key '" + key + "'");
    PSpinSpec spec;
    spec.N = j.at("N").get<int>();
    for (const auto& [key, value] : j.at("betas").items()) {
      std::size_t used = 0;
      int p = 0;
      try {
        p = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != key.size()) throw ParseError("betas key '" + key + "' is not an integer");
      spec.betas[p] = value.get<double>();
    }
    if (j.contains("h")) spec.field = j.at("h").get<std::vector<double>>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    try {
      spec.validate();
    } catch (const std::logic_error& e) {
      throw ParseError(std::string("p-spin spec: ") + e.what());
    }
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("p-spin spec: ") + e.what());
  }
}

PSpinSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace glauberlab::pspin
