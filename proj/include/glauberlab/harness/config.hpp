#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glauberlab/pspin/model.hpp"
#include "glauberlab/spin/random.hpp"

namespace glauberlab::harness {

/// Coefficient law of a random family; `mixed` alternates per instance.
enum class LawChoice { gaussian, exponential, mixed };

/// Random Hamiltonians indexed by instance number. Sizes cycle through
/// [n_min, n_max]; a max_degree of 0 cycles degree profiles 1, 2, 3.
struct RandomHamiltonianFamily {
  int n_min = 4;
  int n_max = 8;
  int max_degree = 0;
  LawChoice law = LawChoice::mixed;
  double scale = 0.3;
  double density = 1.0;
};

/// Random subset distributions; sizes and levels cycle, and `sparse`
/// alternates dense and sparse weights when true.
struct RandomSubsetFamily {
  int n_min = 3;
  int n_max = 8;
  int k_min = 2;
  int k_max = 4;
  bool sparse = true;
};

struct InstanceSpec {
  enum class Kind { random_hamiltonian, hamiltonian_file, random_subset, subset_file, pspin };
  Kind kind = Kind::random_hamiltonian;
  RandomHamiltonianFamily hamiltonians;
  RandomSubsetFamily subsets;
  std::string path;
  std::optional<pspin::PSpinSpec> pspin;
};

struct ExperimentConfig {
  std::string suite;
  std::uint64_t seed = 1;
  /// Zero selects the suite default.
  int count = 0;
  /// Zero selects the suite default.
  double tolerance = 0.0;
  unsigned threads = 0;
  std::string out;
  /// Overrides of the suite's default instance source.
  nlohmann::json instance = nlohmann::json::object();
  /// Suite-specific settings; the accepted keys depend on the suite.
  nlohmann::json options = nlohmann::json::object();
};

/// Strict parse: unknown keys, wrong types, non-positive seeds or tolerances
/// and missing files raise ParseError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig read_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical JSON of the settings that affect results
/// (everything except `out` and `threads`), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Resolves the instance source against a suite default, applying the
/// overrides in `config.instance`.
InstanceSpec resolve_instance(const ExperimentConfig& config, const InstanceSpec& fallback);

spin::CoefficientLaw law_for(LawChoice choice, int index) noexcept;

}  // namespace glauberlab::harness
