#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glauberlab/common/linalg.hpp"
#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::pspin {

/// Mixed p-spin model: sum over p of beta_p / N^{(p-1)/2} times the sum of
/// g_{i_1..i_p} s_{i_1}..s_{i_p} over ordered tuples of distinct sites, plus
/// the external field <h, s>.
struct PSpinSpec {
  int N = 0;
  std::map<int, double> betas;
  std::vector<double> field;  // empty means zero
  std::uint64_t seed = 0;

  void validate() const;
  int max_order() const;
  double field_at(int site) const { return field.empty() ? 0.0 : field[site - 1]; }
};

/// Gaussian attached to an ordered tuple of 1-based sites. A pure function of
/// (seed, p, tuple).
double disorder(std::uint64_t seed, int p, std::span<const int> tuple);

/// Sum of the disorder over every ordering of a set of distinct sites.
double disorder_set_sum(std::uint64_t seed, std::span<const int> sorted_sites);

/// Fourier coefficient of a set of size p >= 2 under the spec.
double set_coefficient(const PSpinSpec& spec, std::span<const int> sorted_sites);

constexpr int kMaterializeMaxSites = 24;
constexpr int kMaterializeMaxOrder = 4;

/// Materializes every term. Requires N <= 24 and p <= 4.
spin::SpinHamiltonian sample_pspin(const PSpinSpec& spec);

/// Energy by direct summation over ordered tuples, without materializing.
double energy_by_tuples(const PSpinSpec& spec, std::span<const int> spins);

struct TemperatureNorms {
  double beta0 = 0.0;
  double beta = 0.0;
};

TemperatureNorms temperature_norms(const PSpinSpec& spec);

/// Exact variance of H(s) over the disorder at any fixed corner.
double energy_variance(const PSpinSpec& spec);

/// Cavity fields of a p <= 3 model computed on demand. The p = 2 couplings
/// are cached; cubic coefficients are cached in packed form when they fit
/// and regenerated from the disorder on each call otherwise.
class StreamingModel {
 public:
  explicit StreamingModel(PSpinSpec spec);

  int n() const noexcept { return spec_.N; }
  const PSpinSpec& spec() const noexcept { return spec_; }
  /// Partial derivative at a corner in coordinate `site` (1-based).
  double field(int site, std::span<const int> spins) const;
  double energy(std::span<const int> spins) const;

 private:
  PSpinSpec spec_;
  double cubic(int i, int j, int k) const;

  Matrix coupling_;
  double cubic_scale_ = 0.0;
  std::vector<double> cubic_cache_;
};

nlohmann::json to_json(const PSpinSpec& spec);
PSpinSpec spec_from_json(const nlohmann::json& j);
PSpinSpec read_spec(const std::string& path);

}  // namespace glauberlab::pspin
