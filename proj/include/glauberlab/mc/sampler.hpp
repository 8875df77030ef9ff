#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/pspin/model.hpp"
#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::mc {

/// Source of cavity fields for the heat-bath update.
class FieldModel {
 public:
  virtual ~FieldModel() = default;
  virtual int n() const = 0;
  /// Partial derivative of the Hamiltonian in `site` (1-based) at a corner.
  virtual double field(int site, std::span<const int> spins) const = 0;
  /// Sites (1-based) whose field depends on the spin at `site`.
  virtual const std::vector<int>& neighbors(int site) const = 0;
};

class HamiltonianModel final : public FieldModel {
 public:
  explicit HamiltonianModel(spin::SpinHamiltonian h);
  int n() const override { return h_.n(); }
  double field(int site, std::span<const int> spins) const override;
  const std::vector<int>& neighbors(int site) const override { return neighbors_[site - 1]; }
  const spin::SpinHamiltonian& hamiltonian() const noexcept { return h_; }

 private:
  spin::SpinHamiltonian h_;
  std::vector<std::vector<int>> neighbors_;
};

class PSpinModel final : public FieldModel {
 public:
  explicit PSpinModel(pspin::PSpinSpec spec);
  int n() const override { return model_.n(); }
  double field(int site, std::span<const int> spins) const override { return model_.field(site, spins); }
  const std::vector<int>& neighbors(int site) const override { return neighbors_[site - 1]; }

 private:
  pspin::StreamingModel model_;
  std::vector<std::vector<int>> neighbors_;
};

struct ChainState {
  std::vector<int> spins;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
};

/// Probability that the updated spin is +1 given cavity field b.
double plus_probability(double b) noexcept;

/// One heat-bath update. The site and the uniform used are pure functions of
/// (seed, chain, step). Returns the updated site (1-based).
int glauber_step(const FieldModel& model, ChainState& state);

/// Uniform random initial state for a chain.
ChainState initial_state(int n, std::uint64_t seed, std::uint64_t chain);

/// Heuristic burn-in: 20 n ceil(log n) sweeps of n single-site steps.
std::uint64_t default_burn_in(int n);

struct RunOptions {
  int chains = 1;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Samples stored as int8 spins, row-major per chain.
struct SampleSet {
  int n = 0;
  int chains = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::int8_t>> per_chain;

  std::size_t samples_per_chain() const;
  std::size_t total_samples() const;
  std::span<const std::int8_t> sample(int chain, std::size_t index) const;
  /// Corner index of a sample (n <= 63).
  std::uint64_t corner(int chain, std::size_t index) const;
};

struct RunSummary {
  double mean_magnetization = 0.0;
  std::vector<double> site_means;
  std::vector<double> chain_magnetization;
};

struct RunResult {
  SampleSet samples;
  RunSummary summary;
  std::vector<ChainState> final_states;
};

/// Runs independent chains in parallel. After `burn_in` updates, the state
/// after every `thin`-th update is recorded.
RunResult run_chains(const FieldModel& model, const RunOptions& opts);

/// Observable values after each of `steps` updates following burn-in.
std::vector<double> run_trajectory(const FieldModel& model, std::uint64_t steps, std::uint64_t burn_in,
                                   std::uint64_t seed, const std::function<double(std::span<const int>)>& observable);

/// Empirical transition counts of one chain over all 2^n corners (n <= 10).
Matrix transition_counts(const FieldModel& model, std::uint64_t steps, std::uint64_t seed);

/// Pooled chi-square of empirical transition counts against an exact
/// transition matrix, summed over rows with their own multinomial law.
struct TransitionFit {
  double chi_square = 0.0;
  int dof = 0;
  /// (chi_square - dof) / sqrt(2 dof).
  double z = 0.0;
  /// Observed moves that the exact operator forbids.
  int forbidden_moves = 0;
  int empty_rows = 0;
};

TransitionFit transition_fit(const Matrix& counts, const Matrix& exact);

/// Half the l1 distance between the empirical law of corner indices and a
/// table. Requires n <= 14.
double tv_to_exact(std::span<const std::uint64_t> corners, const exact::ExactGibbsTable& table);
double tv_to_exact(const SampleSet& samples, const exact::ExactGibbsTable& table);

/// Independent draws from a table by inverse CDF.
std::vector<std::uint64_t> exact_samples(const exact::ExactGibbsTable& table, std::size_t count, std::uint64_t seed);

struct AutocorrOptions {
  std::size_t max_lag = 1000;
  /// Lags are fitted until the autocorrelation first drops below this.
  double min_correlation = 0.05;
};

struct GapEstimate {
  double gap = 0.0;
  std::size_t lags_used = 0;
  std::vector<double> autocorrelation;
};

/// Fits rho(t) = (1 - gap)^t to the observable's empirical autocorrelation.
GapEstimate gap_estimate_autocorr(std::span<const double> trajectory, const AutocorrOptions& opts = {});

enum class SampleFormat { csv, hex };

SampleFormat parse_sample_format(const std::string& name);

/// Header line `# {json}` followed by one sample per row.
void write_samples(std::ostream& out, const SampleSet& samples, SampleFormat format);
SampleSet read_samples(std::istream& in);

}  // namespace glauberlab::mc
