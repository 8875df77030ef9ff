#include "glauberlab/pspin/delta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/parallel.hpp"
#include "glauberlab/common/rng.hpp"
#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::pspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Visits every size-r subset of `pool`, in lexicographic order of positions.
template <typename Visit>
void for_each_subset(const std::vector<int>& pool, int r, Visit&& visit) {
  std::vector<int> chosen;
  chosen.reserve(r);
  auto rec = [&](auto& self, std::size_t start) -> void {
    if (static_cast<int>(chosen.size()) == r) {
      visit(chosen);
      return;
    }
    const std::size_t need = r - chosen.size();
    for (std::size_t a = start; a + need <= pool.size(); ++a) {
      chosen.push_back(pool[a]);
      self(self, a + 1);
      chosen.pop_back();
    }
  };
  rec(rec, 0);
}

std::vector<bool> membership(int n, const std::vector<int>& sites) {
  std::vector<bool> in(n + 1, false);
  for (int s : sites) in[s] = true;
  return in;
}

void check_spins(const std::vector<int>& spins, int n, const char* name) {
  if (static_cast<int>(spins.size()) != n) throw DimensionError(std::string(name) + " must have length N");
  for (int s : spins)
    if (s != 1 && s != -1) throw DomainError(std::string(name) + " entries must be +1 or -1");
}

// Uniform random subset of `pool` of the given size (partial Fisher-Yates).
std::vector<int> random_subset(std::vector<int> pool, int size, CounterRng& rng) {
  for (int a = 0; a < size; ++a) {
    const auto b = a + static_cast<int>(rng.below(pool.size() - a));
    std::swap(pool[a], pool[b]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> random_spins(int n, CounterRng& rng) {
  std::vector<int> s(n);
  for (int& v : s) v = rng.uniform() < 0.5 ? 1 : -1;
  return s;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void Subsystem::validate(int n) const {
  check_spins(outer, n, "outer spins");
  check_spins(inner, n, "inner spins");
  std::vector<int> seen(n + 1, 0);
  for (int s : free_block) {
    if (s < 1 || s > n) throw DomainError("free block site out of range");
    if (seen[s]++) throw DomainError("free block repeats a site");
  }
  std::vector<int> role(n + 1, 0);
  for (const auto* list : {&pinned, &zeroed}) {
    for (int s : *list) {
      if (s < 1 || s > n || !seen[s]) throw DomainError("pinned and zeroed sites must lie in the free block");
      if (role[s]++) throw DomainError("pinned and zeroed sets overlap");
    }
  }
}

std::vector<int> Subsystem::rows() const {
  std::vector<int> out;
  for (int s : free_block)
    if (std::find(pinned.begin(), pinned.end(), s) == pinned.end() &&
        std::find(zeroed.begin(), zeroed.end(), s) == zeroed.end())
      out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

DeltaParts delta_parts(const PSpinSpec& spec, const Subsystem& sub) {
  spec.validate();
  const int n = spec.N;
  sub.validate(n);
  const std::vector<bool> in_block = membership(n, sub.free_block);
  const std::vector<bool> is_zeroed = membership(n, sub.zeroed);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> value(n + 1, 0.0);
  for (int s = 1; s <= n; ++s) {
    if (is_zeroed[s]) continue;
    value[s] = norm * (in_block[s] ? sub.inner[s - 1] : sub.outer[s - 1]);
  }

  DeltaParts parts;
  parts.rows = sub.rows();
  const auto r = static_cast<Eigen::Index>(parts.rows.size());
  for (const auto& [p, beta] : spec.betas) {
    if (beta == 0.0) continue;
    Matrix outer_only = Matrix::Zero(r, r);
    Matrix with_inner = Matrix::Zero(r, r);
    for (Eigen::Index a = 0; a < r; ++a) {
      for (Eigen::Index b = a + 1; b < r; ++b) {
        const int i = parts.rows[a];
        const int j = parts.rows[b];
        std::vector<int> pool;
        for (int s = 1; s <= n; ++s)
          if (!is_zeroed[s] && s != i && s != j) pool.push_back(s);
        double d0 = 0.0;
        double d1 = 0.0;
        std::vector<int> sites;
        for_each_subset(pool, p - 2, [&](const std::vector<int>& spectators) {
          double prod = 1.0;
          bool inside = false;
          for (int s : spectators) {
            prod *= value[s];
            inside = inside || in_block[s];
          }
          sites = spectators;
          sites.push_back(i);
          sites.push_back(j);
          std::sort(sites.begin(), sites.end());
          const double term = prod * disorder_set_sum(spec.seed, sites);
          (inside ? d1 : d0) += term;
        });
        outer_only(a, b) = outer_only(b, a) = beta * norm * d0;
        with_inner(a, b) = with_inner(b, a) = beta * norm * d1;
      }
    }
    parts.outer_only.emplace(p, std::move(outer_only));
    parts.with_inner.emplace(p, std::move(with_inner));
  }
  return parts;
}

DeltaSplit delta_split(const PSpinSpec& spec, const Subsystem& sub) {
  DeltaParts parts = delta_parts(spec, sub);
  const auto r = static_cast<Eigen::Index>(parts.rows.size());
  DeltaSplit split{parts.rows, Matrix::Zero(r, r), Matrix::Zero(r, r)};
  for (const auto& [p, m] : parts.outer_only) split.outer_only += m;
  for (const auto& [p, m] : parts.with_inner) split.with_inner += m;
  return split;
}

DeltaMatrix delta_matrix(const PSpinSpec& spec, const Subsystem& sub) {
  DeltaSplit split = delta_split(spec, sub);
  return {std::move(split.rows), split.outer_only + split.with_inner};
}

DeltaMatrix delta_via_hessian(const PSpinSpec& spec, const Subsystem& sub) {
  sub.validate(spec.N);
  const spin::SpinHamiltonian h = sample_pspin(spec);
  const std::vector<bool> in_block = membership(spec.N, sub.free_block);
  const std::vector<bool> is_pinned = membership(spec.N, sub.pinned);
  spin::PinningContext ctx;
  for (int s = 1; s <= spec.N; ++s) {
    if (!in_block[s]) {
      ctx.pinned.push_back(s);
      ctx.pinned_spins.push_back(sub.outer[s - 1]);
    } else if (is_pinned[s]) {
      ctx.pinned.push_back(s);
      ctx.pinned_spins.push_back(sub.inner[s - 1]);
    }
  }
  ctx.zeroed = sub.zeroed;
  std::sort(ctx.zeroed.begin(), ctx.zeroed.end());
  const spin::PinnedHamiltonian pinned = spin::pin(h, ctx);
  std::vector<int> spins;
  for (int s : pinned.free_sites) spins.push_back(sub.inner[s - 1]);
  return {pinned.free_sites, spin::hessian_at_corner(pinned.hamiltonian, spins)};
}

std::string BadPinningReport::csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "k,trials,bad_fraction,threshold\n";
  for (const auto& row : rows) out << row.k << ',' << row.trials << ',' << row.bad_fraction << ',' << row.threshold << '\n';
  return out.str();
}

BadPinningReport bad_pinning_experiment(const PSpinSpec& spec, const BadPinningOptions& opts) {
  spec.validate();
  const int n = spec.N;
  if (n > 32) throw SizeError("bad pinning experiment requires N <= 32");
  if (opts.anchor < 1 || opts.anchor > n) throw DomainError("anchor site out of range");
  if (opts.trials < 1) throw DomainError("trials must be positive");
  if (opts.random_pairs < 0) throw DomainError("random_pairs must be nonnegative");
  if (!(opts.alpha >= 0.0 && opts.alpha < 0.5)) throw DomainError("alpha must lie in [0, 1/2)");
  if (!(opts.threshold_scale > 0.0)) throw DomainError("threshold scale must be positive");

  CounterRng spin_rng(opts.seed, 0x5b);
  const std::vector<int> outer = random_spins(n, spin_rng);
  std::vector<int> others;
  for (int s = 1; s <= n; ++s)
    if (s != opts.anchor) others.push_back(s);

  BadPinningReport report;
  report.pairs_per_block = 1 + opts.random_pairs;
  for (int k : opts.k_grid) {
    if (k < 2 || k > n) throw DomainError("block sizes must lie in [2, N]");
    const double threshold = opts.threshold_scale * std::pow(static_cast<double>(k) / n, 0.5 - opts.alpha);
    std::vector<double> stats(opts.trials, 0.0);
    parallel_for(static_cast<std::size_t>(opts.trials), [&](std::size_t t) {
      CounterRng rng(opts.seed, hash_words({0xb4d, static_cast<std::uint64_t>(k), t}));
      Subsystem sub;
      sub.free_block = random_subset(others, k - 1, rng);
      sub.free_block.push_back(opts.anchor);
      std::sort(sub.free_block.begin(), sub.free_block.end());
      sub.outer = outer;
      sub.inner = outer;
      double worst = 0.0;
      for (int pair = 0; pair <= opts.random_pairs; ++pair) {
        sub.pinned.clear();
        sub.zeroed.clear();
        if (pair > 0) {
          for (int s : sub.free_block) {
            const double u = rng.uniform();
            if (u < 0.25) {
              sub.pinned.push_back(s);
            } else if (u < 0.5) {
              sub.zeroed.push_back(s);
            }
          }
        }
        const DeltaParts parts = delta_parts(spec, sub);
        for (const auto& [p, m] : parts.outer_only) {
          if (m.rows() == 0) continue;
          const double scale = spec.betas.at(p) * p * std::sqrt(std::log(static_cast<double>(p)));
          worst = std::max(worst, op_norm_symmetric(m) / scale);
        }
      }
      stats[t] = worst;
    });
    BadPinningRow row;
    row.k = k;
    row.trials = opts.trials;
    row.threshold = threshold;
    int bad = 0;
    for (double s : stats) {
      bad += s >= threshold ? 1 : 0;
      row.mean_statistic += s / opts.trials;
    }
    row.bad_fraction = static_cast<double>(bad) / opts.trials;
    report.rows.push_back(row);
  }
  return report;
}

AdversarialPinning adversarial_pinning(const PSpinSpec& spec) {
  spec.validate();
  if (spec.N < 3) throw DomainError("adversarial pinning needs N >= 3");
  for (const auto& [p, beta] : spec.betas)
    if (p != 3 && beta != 0.0) throw DomainError("adversarial pinning needs a pure 3-spin spec");
  const double beta = spec.betas.count(3) ? spec.betas.at(3) : 0.0;
  const int n = spec.N;
  AdversarialPinning out;
  out.spins.assign(n, 1);
  for (int k = 3; k <= n; ++k) {
    const int sites[3] = {1, 2, k};
    out.spins[k - 1] = disorder_set_sum(spec.seed, sites) < 0.0 ? -1 : 1;
  }
  Subsystem sub;
  sub.free_block = {1, 2};
  sub.outer = out.spins;
  sub.inner = out.spins;
  out.entry = delta_matrix(spec, sub).matrix(0, 1);
  // Each set sum is N(0, 6) under the ordered-tuple convention.
  const double scale = beta / n;
  out.predicted_mean = scale * (n - 2) * std::sqrt(6.0) * std::sqrt(2.0 / kPi);
  out.predicted_sd = scale * std::sqrt(static_cast<double>(n - 2)) * std::sqrt(6.0 * (1.0 - 2.0 / kPi));
  return out;
}

NormSumReport norm_sum_statistic(const PSpinSpec& spec, const std::vector<int>& spins, const NormSumOptions& opts) {
  spec.validate();
  const int n = spec.N;
  if (n > 24) throw SizeError("norm sum statistic requires N <= 24");
  if (opts.anchor < 1 || opts.anchor > n) throw DomainError("anchor site out of range");
  if (opts.permutations < 1) throw DomainError("permutations must be positive");
  if (opts.min_block < 1 || opts.min_block >= n) throw DomainError("min_block must lie in [1, N)");

  Subsystem whole;
  whole.free_block.resize(n);
  std::iota(whole.free_block.begin(), whole.free_block.end(), 1);
  whole.outer = spins;
  whole.inner = spins;
  const DeltaMatrix full = delta_matrix(spec, whole);

  std::vector<int> others;
  for (int s = 1; s <= n; ++s)
    if (s != opts.anchor) others.push_back(s);

  std::vector<double> values(opts.permutations);
  parallel_for(static_cast<std::size_t>(opts.permutations), [&](std::size_t t) {
    CounterRng rng(opts.seed, hash_words({0x5e9, t}));
    std::vector<int> order = others;
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (int k = n; k > opts.min_block; --k) {
      std::vector<int> block{opts.anchor - 1};
      for (int a = 0; a < k - 1; ++a) block.push_back(order[a] - 1);
      const Matrix sub = full.matrix(block, block);
      sum += op_norm_symmetric(sub) / k;
    }
    values[t] = std::exp(opts.multiplier * sum);
  });

  NormSumReport report;
  report.permutations = opts.permutations;
  std::sort(values.begin(), values.end());
  report.mean = std::accumulate(values.begin(), values.end(), 0.0) / opts.permutations;
  report.median = quantile(values, 0.5);
  report.q90 = quantile(values, 0.9);
  report.max = values.back();
  return report;
}

}  // namespace glauberlab::pspin
