#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glauberlab/common/linalg.hpp"
#include "glauberlab/pspin/model.hpp"

namespace glauberlab::pspin {

/// A subsystem of the p-spin model. Sites outside `free_block` are pinned to
/// `outer`; inside it, sites in `zeroed` are removed, sites in `pinned` keep
/// their `inner` spin, and the remaining sites index the matrix. All sites
/// are 1-based. Spins are +-1; the 1/sqrt(N) normalization is applied
/// internally.
struct Subsystem {
  std::vector<int> free_block;
  std::vector<int> pinned;
  std::vector<int> zeroed;
  std::vector<int> outer;  // length N
  std::vector<int> inner;  // length N

  void validate(int n) const;
  std::vector<int> rows() const;
};

struct DeltaMatrix {
  std::vector<int> rows;
  Matrix matrix;
};

/// Contributions of interaction order p, split by whether any of the p - 2
/// spectator sites lies inside the free block.
struct DeltaParts {
  std::vector<int> rows;
  std::map<int, Matrix> outer_only;  // s' = 0
  std::map<int, Matrix> with_inner;  // s' >= 1
};

/// Direct summation over spectator sets, independent of any Hamiltonian.
DeltaParts delta_parts(const PSpinSpec& spec, const Subsystem& sub);

DeltaMatrix delta_matrix(const PSpinSpec& spec, const Subsystem& sub);

struct DeltaSplit {
  std::vector<int> rows;
  Matrix outer_only;
  Matrix with_inner;
};

DeltaSplit delta_split(const PSpinSpec& spec, const Subsystem& sub);

/// Same matrix through the materialized Hamiltonian: pin, then Hessian.
DeltaMatrix delta_via_hessian(const PSpinSpec& spec, const Subsystem& sub);

struct BadPinningOptions {
  std::vector<int> k_grid;
  double alpha = 0.25;
  int trials = 64;
  double threshold_scale = 1.0;
  /// Random (pinned, zeroed) pairs tried in addition to the empty pair.
  int random_pairs = 0;
  int anchor = 1;
  std::uint64_t seed = 1;
};

struct BadPinningRow {
  int k = 0;
  int trials = 0;
  double bad_fraction = 0.0;
  double threshold = 0.0;
  double mean_statistic = 0.0;
};

struct BadPinningReport {
  std::vector<BadPinningRow> rows;
  int pairs_per_block = 1;
  std::string csv() const;
};

/// Fraction of random free blocks containing the anchor whose outer-only
/// matrices exceed threshold_scale (k/N)^{1/2 - alpha} after dividing by
/// beta_p p sqrt(log p). The outer spins are fixed per seed.
BadPinningReport bad_pinning_experiment(const PSpinSpec& spec, const BadPinningOptions& opts);

/// Pure 3-spin: pin every site but 1 and 2 to the sign of the disorder sum
/// on {1, 2, k}, making the (1, 2) interaction a sum of folded normals.
struct AdversarialPinning {
  double entry = 0.0;
  double predicted_mean = 0.0;
  double predicted_sd = 0.0;
  std::vector<int> spins;
};

AdversarialPinning adversarial_pinning(const PSpinSpec& spec);

struct NormSumOptions {
  int anchor = 1;
  int permutations = 64;
  int min_block = 2;
  double multiplier = 1.0;
  std::uint64_t seed = 1;
};

struct NormSumReport {
  int permutations = 0;
  double mean = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double max = 0.0;
};

/// exp(multiplier * sum over k > min_block of ||Delta(A_k)||_op / k) for
/// nested blocks A_k taken from random permutations of the non-anchor sites.
/// The supremum over subsystems is truncated to the empty pair with the inner
/// spins equal to `spins`.
NormSumReport norm_sum_statistic(const PSpinSpec& spec, const std::vector<int>& spins, const NormSumOptions& opts);

}  // namespace glauberlab::pspin
