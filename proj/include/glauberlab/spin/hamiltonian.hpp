#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glauberlab/common/combinatorics.hpp"
#include "glauberlab/common/linalg.hpp"

namespace glauberlab::spin {

/// Sorted, strictly increasing list of 1-based site indices.
using SiteSet = std::vector<int>;
/// Spin configuration with entries in {+1, -1}.
using Spins = std::vector<int>;

/// Corner states are indexed so that site 1 is the most significant bit and a
/// set bit means spin -1. Index 0 is the all-plus corner.
inline Mask site_bit(int n, int site) noexcept { return Mask{1} << (n - site); }
Spins spins_from_index(int n, std::uint64_t index);
std::uint64_t index_from_spins(std::span<const int> spins);

/// A function on {+1,-1}^n stored by its nonzero Fourier coefficients.
/// Evaluation anywhere in [-1,1]^n uses the multilinear extension.
class SpinHamiltonian {
 public:
  struct Term {
    std::vector<int> sites;  // 0-based
    double coeff;
  };

  explicit SpinHamiltonian(int n = 0);
  /// Validates every key (sorted, strictly increasing, within 1..n) and
  /// drops zero coefficients.
  SpinHamiltonian(int n, std::map<SiteSet, double> terms);

  int n() const noexcept { return n_; }
  const std::map<SiteSet, double>& terms() const noexcept { return terms_; }
  double coefficient(const SiteSet& sites) const;
  int degree() const noexcept { return degree_; }

  /// Flat term list and per-site incidence, 0-based.
  const std::vector<Term>& compiled() const noexcept { return compiled_; }
  const std::vector<std::vector<int>>& incidence() const noexcept { return incidence_; }

  bool operator==(const SpinHamiltonian& other) const { return n_ == other.n_ && terms_ == other.terms_; }

 private:
  int n_;
  int degree_ = 0;
  std::map<SiteSet, double> terms_;
  std::vector<Term> compiled_;
  std::vector<std::vector<int>> incidence_;
};

/// Coefficients from a full corner table of length 2^n.
SpinHamiltonian fourier_transform(std::span<const double> values);

/// Values at all 2^n corners in corner-index order. Requires n <= 24.
std::vector<double> corner_table(const SpinHamiltonian& h);

/// Multilinear extension at x; coordinates are clamped to [-1, 1] after a
/// 1e-12 tolerance check.
double evaluate(const SpinHamiltonian& h, std::span<const double> x);
double evaluate_corner(const SpinHamiltonian& h, std::span<const int> spins);

/// Partial derivative of the multilinear extension in coordinate j (1-based).
double cavity_field(const SpinHamiltonian& h, int j, std::span<const double> x);
double cavity_field(const SpinHamiltonian& h, int j, std::span<const int> spins);

Vector gradient(const SpinHamiltonian& h, std::span<const double> x);
Matrix hessian(const SpinHamiltonian& h, std::span<const double> x);
Matrix hessian_at_corner(const SpinHamiltonian& h, std::span<const int> spins);

/// Sites in 1..n fixed to spins (pinned) or set to zero in the extension.
struct PinningContext {
  SiteSet pinned;
  Spins pinned_spins;
  SiteSet zeroed;
};

struct PinnedHamiltonian {
  SpinHamiltonian hamiltonian;
  /// Original 1-based site of each remaining coordinate.
  std::vector<int> free_sites;
};

void validate(const PinningContext& ctx, int n);
PinnedHamiltonian pin(const SpinHamiltonian& h, const PinningContext& ctx);

/// Ising Hamiltonian 1/2 <s, J s> + <field, s>.
SpinHamiltonian ising(const Matrix& coupling, const Vector& field);

}  // namespace glauberlab::spin
