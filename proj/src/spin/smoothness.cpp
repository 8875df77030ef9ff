#include "glauberlab/spin/smoothness.hpp"

#include <algorithm>
#include <cmath>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::spin {

namespace {

std::vector<int> active_sites(const SpinHamiltonian& h) {
  std::vector<bool> active(h.n(), false);
  for (const auto& t : h.compiled())
    if (t.sites.size() >= 3)
      for (int s : t.sites) active[s] = true;
  std::vector<int> out;
  for (int i = 0; i < h.n(); ++i)
    if (active[i]) out.push_back(i);
  return out;
}

double norm_at(const SpinHamiltonian& h, const Spins& s) { return op_norm_symmetric(hessian_at_corner(h, s)); }

double principal_norm(const Matrix& m, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  if (k < 2) return 0.0;
  if (k == 2) return std::abs(m(idx[0], idx[1]));
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
  return op_norm_symmetric(sub);
}

}  // namespace

const char* to_string(SmoothnessMethod m) noexcept {
  return m == SmoothnessMethod::exhaustive ? "exhaustive" : "sampled-lower-bound";
}

SmoothnessReport smoothness_beta_exhaustive(const SpinHamiltonian& h) {
  const std::vector<int> active = active_sites(h);
  if (active.size() > 20) throw SizeError("exhaustive smoothness limited to 20 sites in terms of degree >= 3");
  SmoothnessReport best;
  best.method = SmoothnessMethod::exhaustive;
  best.argmax_corner.assign(h.n(), 1);
  best.beta = -1.0;
  Spins s(h.n(), 1);
  const std::uint64_t count = std::uint64_t{1} << active.size();
  for (std::uint64_t code = 0; code < count; ++code) {
    for (std::size_t a = 0; a < active.size(); ++a) s[active[a]] = (code >> a & 1U) != 0 ? -1 : 1;
    const double v = norm_at(h, s);
    if (v > best.beta) {
      best.beta = v;
      best.argmax_corner = s;
    }
  }
  return best;
}

SmoothnessReport smoothness_beta_sampled(const SpinHamiltonian& h, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw DomainError("restarts must be positive");
  const std::vector<int> active = active_sites(h);
  SmoothnessReport best;
  best.method = SmoothnessMethod::sampled_lower_bound;
  best.argmax_corner.assign(h.n(), 1);
  best.beta = norm_at(h, best.argmax_corner);
  if (active.empty()) return best;

  CounterRng rng(seed, 0x5a3c);
  for (int r = 0; r < restarts; ++r) {
    Spins s(h.n(), 1);
    for (int i : active) s[i] = (rng() >> 63) != 0 ? -1 : 1;
    double current = norm_at(h, s);
    for (;;) {
      int best_flip = -1;
      double best_value = current;
      for (int i : active) {
        s[i] = -s[i];
        const double v = norm_at(h, s);
        s[i] = -s[i];
        if (v > best_value + 1e-14 * std::max(1.0, best_value)) {
          best_value = v;
          best_flip = i;
        }
      }
      if (best_flip < 0) break;
      s[best_flip] = -s[best_flip];
      current = best_value;
    }
    if (current > best.beta) {
      best.beta = current;
      best.argmax_corner = s;
    }
  }
  return best;
}

double t_constant(const SpinHamiltonian& h) {
  const int n = h.n();
  if (n > 12) throw SizeError("t_constant enumerates 5^n labellings; n <= 12 required");
  std::uint64_t ternary_count = 1;
  for (int i = 0; i < n; ++i) ternary_count *= 3;

  double best = 0.0;
  std::vector<double> x(n);
  std::vector<int> support;
  std::vector<int> free_sites;
  for (std::uint64_t code = 0; code < ternary_count; ++code) {
    // Digit 0: zeroed, 1: spin +1, 2: spin -1. Nonzero coordinates are then
    // split between pinned and free below.
    std::uint64_t c = code;
    support.clear();
    for (int i = 0; i < n; ++i) {
      const auto digit = c % 3;
      c /= 3;
      x[i] = digit == 0 ? 0.0 : (digit == 1 ? 1.0 : -1.0);
      if (digit != 0) support.push_back(i);
    }
    const Matrix hess = hessian(h, x);
    const Mask full = (Mask{1} << support.size()) - 1;
    for (Mask sub = full;; sub = (sub - 1) & full) {
      free_sites.clear();
      for (std::size_t b = 0; b < support.size(); ++b)
        if (sub >> b & 1U) free_sites.push_back(support[b]);
      best = std::max(best, principal_norm(hess, free_sites));
      if (sub == 0) break;
    }
  }
  return best;
}

}  // namespace glauberlab::spin
