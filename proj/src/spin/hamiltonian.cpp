#include "glauberlab/spin/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "glauberlab/common/errors.hpp"

namespace glauberlab::spin {

namespace {

void check_site_set(const SiteSet& s, int n) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 1 || s[i] > n) throw DomainError("site " + std::to_string(s[i]) + " outside 1.." + std::to_string(n));
    if (i > 0 && s[i] <= s[i - 1]) throw DomainError("site list must be strictly increasing");
  }
}

void check_point(const SpinHamiltonian& h, std::size_t size) {
  if (static_cast<int>(size) != h.n())
    throw DimensionError("point has " + std::to_string(size) + " coordinates, expected " + std::to_string(h.n()));
}

std::vector<double> clamped(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) {
    if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-12) throw DomainError("point outside [-1,1]^n");
    v = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

std::vector<double> as_real(std::span<const int> spins) {
  std::vector<double> out(spins.size());
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] != 1 && spins[i] != -1) throw DomainError("spin entries must be +1 or -1");
    out[i] = spins[i];
  }
  return out;
}

// In-place Walsh-Hadamard transform: out[x] = sum_m in[m] (-1)^{|x & m|}.
void walsh_hadamard(std::vector<double>& v) {
  const std::size_t size = v.size();
  for (std::size_t len = 1; len < size; len <<= 1) {
    for (std::size_t i = 0; i < size; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

template <typename Values>
double product_except(const std::vector<int>& sites, const Values& x, int skip_a, int skip_b) {
  double p = 1.0;
  for (int s : sites)
    if (s != skip_a && s != skip_b) p *= x[s];
  return p;
}

}  // namespace

Spins spins_from_index(int n, std::uint64_t index) {
  Spins s(n);
  for (int i = 1; i <= n; ++i) s[i - 1] = (index & site_bit(n, i)) != 0 ? -1 : 1;
  return s;
}

std::uint64_t index_from_spins(std::span<const int> spins) {
  const int n = static_cast<int>(spins.size());
  std::uint64_t index = 0;
  for (int i = 1; i <= n; ++i)
    if (spins[i - 1] == -1) index |= site_bit(n, i);
  return index;
}

SpinHamiltonian::SpinHamiltonian(int n) : n_(n), incidence_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n < 0) throw DomainError("site count must be nonnegative");
}

SpinHamiltonian::SpinHamiltonian(int n, std::map<SiteSet, double> terms) : SpinHamiltonian(n) {
  for (auto it = terms.begin(); it != terms.end();) {
    check_site_set(it->first, n);
    if (!std::isfinite(it->second)) throw DomainError("non-finite coefficient");
    it = it->second == 0.0 ? terms.erase(it) : std::next(it);
  }
  terms_ = std::move(terms);
  compiled_.reserve(terms_.size());
  for (const auto& [sites, coeff] : terms_) {
    Term t{{}, coeff};
    t.sites.reserve(sites.size());
    for (int s : sites) {
      incidence_[s - 1].push_back(static_cast<int>(compiled_.size()));
      t.sites.push_back(s - 1);
    }
    degree_ = std::max(degree_, static_cast<int>(sites.size()));
    compiled_.push_back(std::move(t));
  }
}

double SpinHamiltonian::coefficient(const SiteSet& sites) const {
  const auto it = terms_.find(sites);
  return it == terms_.end() ? 0.0 : it->second;
}

SpinHamiltonian fourier_transform(std::span<const double> values) {
  const std::size_t size = values.size();
  if (size == 0 || !std::has_single_bit(size)) throw DimensionError("corner table length must be a power of two");
  const int n = std::countr_zero(size);
  if (n > 24) throw SizeError("corner table too large");
  std::vector<double> v(values.begin(), values.end());
  walsh_hadamard(v);
  const double scale = std::ldexp(1.0, -n);
  std::map<SiteSet, double> terms;
  for (std::size_t m = 0; m < size; ++m) {
    if (v[m] == 0.0) continue;
    SiteSet sites;
    for (int i = 1; i <= n; ++i)
      if (m & site_bit(n, i)) sites.push_back(i);
    terms.emplace(std::move(sites), v[m] * scale);
  }
  return SpinHamiltonian(n, std::move(terms));
}

std::vector<double> corner_table(const SpinHamiltonian& h) {
  const int n = h.n();
  if (n > 24) throw SizeError("corner table requires n <= 24");
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (const auto& [sites, coeff] : h.terms()) {
    Mask m = 0;
    for (int s : sites) m |= site_bit(n, s);
    v[m] += coeff;
  }
  walsh_hadamard(v);
  return v;
}

double evaluate(const SpinHamiltonian& h, std::span<const double> x) {
  check_point(h, x.size());
  const std::vector<double> p = clamped(x);
  double total = 0.0;
  for (const auto& t : h.compiled()) total += t.coeff * product_except(t.sites, p, -1, -1);
  return total;
}

double evaluate_corner(const SpinHamiltonian& h, std::span<const int> spins) {
  check_point(h, spins.size());
  const std::vector<double> p = as_real(spins);
  double total = 0.0;
  for (const auto& t : h.compiled()) total += t.coeff * product_except(t.sites, p, -1, -1);
  return total;
}

namespace {

template <typename Values>
double cavity_at(const SpinHamiltonian& h, int j, const Values& p) {
  if (j < 1 || j > h.n()) throw DomainError("site index out of range");
  double total = 0.0;
  for (int idx : h.incidence()[j - 1]) {
    const auto& t = h.compiled()[idx];
    total += t.coeff * product_except(t.sites, p, j - 1, -1);
  }
  return total;
}

Matrix hessian_of(const SpinHamiltonian& h, const std::vector<double>& p) {
  Matrix out = Matrix::Zero(h.n(), h.n());
  for (const auto& t : h.compiled()) {
    const auto& s = t.sites;
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        const double v = t.coeff * product_except(s, p, s[a], s[b]);
        out(s[a], s[b]) += v;
        out(s[b], s[a]) += v;
      }
    }
  }
  return out;
}

}  // namespace

double cavity_field(const SpinHamiltonian& h, int j, std::span<const double> x) {
  check_point(h, x.size());
  return cavity_at(h, j, clamped(x));
}

double cavity_field(const SpinHamiltonian& h, int j, std::span<const int> spins) {
  check_point(h, spins.size());
  for (int s : spins)
    if (s != 1 && s != -1) throw DomainError("spin entries must be +1 or -1");
  return cavity_at(h, j, spins);
}

Vector gradient(const SpinHamiltonian& h, std::span<const double> x) {
  check_point(h, x.size());
  const std::vector<double> p = clamped(x);
  Vector g = Vector::Zero(h.n());
  for (const auto& t : h.compiled())
    for (int s : t.sites) g[s] += t.coeff * product_except(t.sites, p, s, -1);
  return g;
}

Matrix hessian(const SpinHamiltonian& h, std::span<const double> x) {
  check_point(h, x.size());
  return hessian_of(h, clamped(x));
}

Matrix hessian_at_corner(const SpinHamiltonian& h, std::span<const int> spins) {
  check_point(h, spins.size());
  return hessian_of(h, as_real(spins));
}

void validate(const PinningContext& ctx, int n) {
  check_site_set(ctx.pinned, n);
  check_site_set(ctx.zeroed, n);
  if (ctx.pinned_spins.size() != ctx.pinned.size()) throw DimensionError("one spin per pinned site required");
  for (int s : ctx.pinned_spins)
    if (s != 1 && s != -1) throw DomainError("pinned spins must be +1 or -1");
  std::vector<int> both;
  std::set_intersection(ctx.pinned.begin(), ctx.pinned.end(), ctx.zeroed.begin(), ctx.zeroed.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw DomainError("pinned and zeroed sites overlap at site " + std::to_string(both.front()));
}

PinnedHamiltonian pin(const SpinHamiltonian& h, const PinningContext& ctx) {
  const int n = h.n();
  validate(ctx, n);
  std::vector<int> pinned_spin(n + 1, 0);
  std::vector<bool> zeroed(n + 1, false);
  for (std::size_t a = 0; a < ctx.pinned.size(); ++a) pinned_spin[ctx.pinned[a]] = ctx.pinned_spins[a];
  for (int b : ctx.zeroed) zeroed[b] = true;

  PinnedHamiltonian out;
  std::vector<int> new_index(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    if (pinned_spin[i] == 0 && !zeroed[i]) {
      out.free_sites.push_back(i);
      new_index[i] = static_cast<int>(out.free_sites.size());
    }
  }
  std::map<SiteSet, double> terms;
  for (const auto& [sites, coeff] : h.terms()) {
    double c = coeff;
    SiteSet rest;
    bool killed = false;
    for (int s : sites) {
      if (zeroed[s]) {
        killed = true;
        break;
      }
      if (pinned_spin[s] != 0) {
        c *= pinned_spin[s];
      } else {
        rest.push_back(new_index[s]);
      }
    }
    if (!killed) terms[std::move(rest)] += c;
  }
  out.hamiltonian = SpinHamiltonian(static_cast<int>(out.free_sites.size()), std::move(terms));
  return out;
}

SpinHamiltonian ising(const Matrix& coupling, const Vector& field) {
  const auto n = coupling.rows();
  if (coupling.cols() != n || field.size() != n) throw DimensionError("coupling must be n x n and field length n");
  std::map<SiteSet, double> terms;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (coupling(i, i) != 0.0) throw DomainError("coupling diagonal must be zero");
    if (field[i] != 0.0) terms[{static_cast<int>(i) + 1}] = field[i];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(coupling(i, j) - coupling(j, i)) > 1e-12 * (1.0 + std::abs(coupling(i, j))))
        throw DomainError("coupling must be symmetric");
      if (coupling(i, j) != 0.0) terms[{static_cast<int>(i) + 1, static_cast<int>(j) + 1}] = coupling(i, j);
    }
  }
  return SpinHamiltonian(static_cast<int>(n), std::move(terms));
}

}  // namespace glauberlab::spin
