#include "glauberlab/mc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/common/parallel.hpp"
#include "glauberlab/common/rng.hpp"

namespace glauberlab::mc {

namespace {

constexpr std::uint64_t kInitStream = 0x1a17;

struct Draw {
  int site;
  double u;
};

Draw draw(std::uint64_t seed, std::uint64_t chain, std::uint64_t step, int n) {
  CounterRng rng(seed, chain, 2 * step);
  const int site = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  return {site, rng.uniform()};
}

// A chain with cavity fields cached until a neighbor flips.
class CachedChain {
 public:
  CachedChain(const FieldModel& model, ChainState state)
      : model_(model), state_(std::move(state)), cache_(state_.spins.size(), 0.0), valid_(state_.spins.size(), 0) {}

  void step() {
    const Draw d = draw(state_.seed, state_.chain, state_.step, model_.n());
    const auto i = static_cast<std::size_t>(d.site - 1);
    if (!valid_[i]) {
      cache_[i] = model_.field(d.site, state_.spins);
      valid_[i] = 1;
    }
    const int next = d.u < plus_probability(cache_[i]) ? 1 : -1;
    if (next != state_.spins[i]) {
      state_.spins[i] = next;
      for (int j : model_.neighbors(d.site)) valid_[j - 1] = 0;
    }
    ++state_.step;
  }

  const ChainState& state() const noexcept { return state_; }

 private:
  const FieldModel& model_;
  ChainState state_;
  std::vector<double> cache_;
  std::vector<char> valid_;
};

std::uint64_t corner_of(std::span<const int> spins) {
  const int n = static_cast<int>(spins.size());
  std::uint64_t x = 0;
  for (int i = 1; i <= n; ++i)
    if (spins[i - 1] < 0) x |= spin::site_bit(n, i);
  return x;
}

std::string hex_row(std::span<const std::int8_t> row) {
  static const char digits[] = "0123456789abcdef";
  const std::size_t n = row.size();
  const std::size_t pad = (4 - n % 4) % 4;
  std::string out;
  out.reserve((n + pad) / 4);
  int nibble = 0;
  for (std::size_t b = 0; b < n + pad; ++b) {
    const bool set = b >= pad && row[b - pad] < 0;
    nibble = (nibble << 1) | (set ? 1 : 0);
    if (b % 4 == 3) {
      out.push_back(digits[nibble]);
      nibble = 0;
    }
  }
  return out;
}

void parse_hex_row(const std::string& text, int n, std::vector<std::int8_t>& out) {
  const std::size_t pad = (4 - n % 4) % 4;
  if (text.size() * 4 != n + pad) throw ParseError("hex sample has the wrong length");
  for (std::size_t c = 0; c < text.size(); ++c) {
    const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(text[c])));
    int v = 0;
    if (ch >= '0' && ch <= '9') {
      v = ch - '0';
    } else if (ch >= 'a' && ch <= 'f') {
      v = ch - 'a' + 10;
    } else {
      throw ParseError("invalid hex digit in sample");
    }
    for (int k = 3; k >= 0; --k) {
      const std::size_t b = c * 4 + (3 - k);
      const bool set = (v >> k) & 1;
      if (b < pad) {
        if (set) throw ParseError("nonzero padding in hex sample");
        continue;
      }
      out.push_back(set ? -1 : 1);
    }
  }
}

void parse_csv_row(const std::string& text, int n, std::vector<std::int8_t>& out) {
  std::stringstream ss(text);
  std::string cell;
  int count = 0;
  while (std::getline(ss, cell, ',')) {
    if (cell == "1" || cell == "+1") {
      out.push_back(1);
    } else if (cell == "-1") {
      out.push_back(-1);
    } else {
      throw ParseError("sample entries must be 1 or -1");
    }
    ++count;
  }
  if (count != n) throw ParseError("sample row has the wrong length");
}

}  // namespace

HamiltonianModel::HamiltonianModel(spin::SpinHamiltonian h) : h_(std::move(h)), neighbors_(h_.n()) {
  for (int i = 0; i < h_.n(); ++i) {
    std::vector<int>& nb = neighbors_[i];
    for (int idx : h_.incidence()[i])
      for (int s : h_.compiled()[idx].sites)
        if (s != i) nb.push_back(s + 1);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

double HamiltonianModel::field(int site, std::span<const int> spins) const {
  return spin::cavity_field(h_, site, spins);
}

PSpinModel::PSpinModel(pspin::PSpinSpec spec) : model_(std::move(spec)), neighbors_(model_.n()) {
  const bool coupled = model_.spec().max_order() >= 2;
  for (int i = 1; i <= model_.n() && coupled; ++i)
    for (int j = 1; j <= model_.n(); ++j)
      if (j != i) neighbors_[i - 1].push_back(j);
}

double plus_probability(double b) noexcept {
  if (b >= 0.0) return 1.0 / (1.0 + std::exp(-2.0 * b));
  const double e = std::exp(2.0 * b);
  return e / (1.0 + e);
}

int glauber_step(const FieldModel& model, ChainState& state) {
  const int n = model.n();
  if (static_cast<int>(state.spins.size()) != n) throw DimensionError("state length differs from the model");
  const Draw d = draw(state.seed, state.chain, state.step, n);
  const double b = model.field(d.site, state.spins);
  state.spins[d.site - 1] = d.u < plus_probability(b) ? 1 : -1;
  ++state.step;
  return d.site;
}

ChainState initial_state(int n, std::uint64_t seed, std::uint64_t chain) {
  if (n < 1) throw DomainError("chains need at least one site");
  ChainState s;
  s.seed = seed;
  s.chain = chain;
  CounterRng rng(seed, hash_words({kInitStream, chain}));
  s.spins.resize(n);
  for (int& v : s.spins) v = rng.uniform() < 0.5 ? 1 : -1;
  return s;
}

std::uint64_t default_burn_in(int n) {
  const auto sweeps = static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::log(static_cast<double>(n)))));
  return 20 * static_cast<std::uint64_t>(n) * sweeps * static_cast<std::uint64_t>(n);
}

std::size_t SampleSet::samples_per_chain() const {
  if (per_chain.empty() || n == 0) return 0;
  return per_chain.front().size() / static_cast<std::size_t>(n);
}

std::size_t SampleSet::total_samples() const { return samples_per_chain() * per_chain.size(); }

std::span<const std::int8_t> SampleSet::sample(int chain, std::size_t index) const {
  const auto& data = per_chain.at(chain);
  const std::size_t offset = index * static_cast<std::size_t>(n);
  if (offset + n > data.size()) throw DomainError("sample index out of range");
  return {data.data() + offset, static_cast<std::size_t>(n)};
}

std::uint64_t SampleSet::corner(int chain, std::size_t index) const {
  if (n > 63) throw SizeError("corner index requires n <= 63");
  const auto row = sample(chain, index);
  std::uint64_t x = 0;
  for (int i = 1; i <= n; ++i)
    if (row[i - 1] < 0) x |= spin::site_bit(n, i);
  return x;
}

RunResult run_chains(const FieldModel& model, const RunOptions& opts) {
  const int n = model.n();
  if (opts.chains < 1) throw DomainError("chains must be positive");
  if (opts.steps < opts.burn_in) throw DomainError("steps must be at least burn_in");
  if (opts.thin < 1) throw DomainError("thin must be positive");

  RunResult result;
  SampleSet& set = result.samples;
  set.n = n;
  set.chains = opts.chains;
  set.steps = opts.steps;
  set.seed = opts.seed;
  set.per_chain.resize(opts.chains);
  result.final_states.resize(opts.chains);
  const std::uint64_t kept = (opts.steps - opts.burn_in) / opts.thin;

  parallel_for(
      static_cast<std::size_t>(opts.chains),
      [&](std::size_t c) {
        CachedChain chain(model, initial_state(n, opts.seed, c));
        for (std::uint64_t t = 0; t < opts.burn_in; ++t) chain.step();
        auto& out = set.per_chain[c];
        out.reserve(kept * n);
        for (std::uint64_t r = 0; r < kept; ++r) {
          for (std::uint64_t t = 0; t < opts.thin; ++t) chain.step();
          for (int v : chain.state().spins) out.push_back(static_cast<std::int8_t>(v));
        }
        while (chain.state().step < opts.steps) chain.step();
        result.final_states[c] = chain.state();
      },
      opts.threads);

  RunSummary& summary = result.summary;
  summary.site_means.assign(n, 0.0);
  summary.chain_magnetization.assign(opts.chains, 0.0);
  if (kept > 0) {
    for (int c = 0; c < opts.chains; ++c) {
      std::vector<double> sums(n, 0.0);
      for (std::uint64_t r = 0; r < kept; ++r) {
        const auto row = set.sample(c, r);
        for (int i = 0; i < n; ++i) sums[i] += row[i];
      }
      for (int i = 0; i < n; ++i) {
        const double mean = sums[i] / static_cast<double>(kept);
        summary.site_means[i] += mean / opts.chains;
        summary.chain_magnetization[c] += mean / n;
      }
      summary.mean_magnetization += summary.chain_magnetization[c] / opts.chains;
    }
  }
  return result;
}

std::vector<double> run_trajectory(const FieldModel& model, std::uint64_t steps, std::uint64_t burn_in,
                                   std::uint64_t seed, const std::function<double(std::span<const int>)>& observable) {
  CachedChain chain(model, initial_state(model.n(), seed, 0));
  for (std::uint64_t t = 0; t < burn_in; ++t) chain.step();
  std::vector<double> values;
  values.reserve(steps);
  for (std::uint64_t t = 0; t < steps; ++t) {
    chain.step();
    values.push_back(observable(chain.state().spins));
  }
  return values;
}

Matrix transition_counts(const FieldModel& model, std::uint64_t steps, std::uint64_t seed) {
  const int n = model.n();
  if (n > 10) throw SizeError("transition counts require n <= 10");
  const auto dim = static_cast<Eigen::Index>(1) << n;
  Matrix counts = Matrix::Zero(dim, dim);
  CachedChain chain(model, initial_state(n, seed, 0));
  std::uint64_t from = corner_of(chain.state().spins);
  for (std::uint64_t t = 0; t < steps; ++t) {
    chain.step();
    const std::uint64_t to = corner_of(chain.state().spins);
    counts(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) += 1.0;
    from = to;
  }
  return counts;
}

TransitionFit transition_fit(const Matrix& counts, const Matrix& exact) {
  if (counts.rows() != exact.rows() || counts.cols() != exact.cols() || counts.rows() != counts.cols()) {
    throw DimensionError("transition_fit: shape mismatch");
  }
  TransitionFit fit;
  for (Eigen::Index x = 0; x < counts.rows(); ++x) {
    const double row = counts.row(x).sum();
    if (row == 0.0) {
      ++fit.empty_rows;
      continue;
    }
    int outcomes = 0;
    for (Eigen::Index y = 0; y < counts.cols(); ++y) {
      if (exact(x, y) == 0.0) {
        if (counts(x, y) != 0.0) ++fit.forbidden_moves;
        continue;
      }
      const double expected = row * exact(x, y);
      fit.chi_square += (counts(x, y) - expected) * (counts(x, y) - expected) / expected;
      ++outcomes;
    }
    fit.dof += std::max(outcomes - 1, 0);
  }
  fit.z = fit.dof > 0 ? (fit.chi_square - fit.dof) / std::sqrt(2.0 * fit.dof) : 0.0;
  return fit;
}

double tv_to_exact(std::span<const std::uint64_t> corners, const exact::ExactGibbsTable& table) {
  if (table.n > 14) throw SizeError("tv_to_exact requires n <= 14");
  if (corners.empty()) throw DomainError("no samples");
  std::vector<double> freq(table.size(), 0.0);
  const double w = 1.0 / static_cast<double>(corners.size());
  for (std::uint64_t x : corners) {
    if (x >= table.size()) throw DomainError("corner index out of range");
    freq[x] += w;
  }
  std::vector<double> diffs(table.size());
  for (std::size_t x = 0; x < table.size(); ++x) diffs[x] = std::abs(freq[x] - table.probs[x]);
  return 0.5 * pairwise_sum(diffs);
}

double tv_to_exact(const SampleSet& samples, const exact::ExactGibbsTable& table) {
  if (samples.n != table.n) throw DimensionError("samples and table differ in n");
  std::vector<std::uint64_t> corners;
  corners.reserve(samples.total_samples());
  for (int c = 0; c < samples.chains; ++c)
    for (std::size_t r = 0; r < samples.samples_per_chain(); ++r) corners.push_back(samples.corner(c, r));
  return tv_to_exact(corners, table);
}

std::vector<std::uint64_t> exact_samples(const exact::ExactGibbsTable& table, std::size_t count, std::uint64_t seed) {
  std::vector<double> cdf(table.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < table.size(); ++x) cdf[x] = acc += table.probs[x];
  CounterRng rng(seed, 0xcdf);
  std::vector<std::uint64_t> out(count);
  for (auto& x : out) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    x = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
  }
  return out;
}

GapEstimate gap_estimate_autocorr(std::span<const double> trajectory, const AutocorrOptions& opts) {
  const std::size_t m = trajectory.size();
  if (m < 3) throw DomainError("trajectory too short");
  double mean = 0.0;
  for (double v : trajectory) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : trajectory) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  if (!(var > 1e-14 * (1.0 + mean * mean))) throw DomainError("observable has zero variance along the trajectory");

  GapEstimate est;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t lag = 1; lag <= opts.max_lag && lag < m - 1; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < m; ++i) c += (trajectory[i] - mean) * (trajectory[i + lag] - mean);
    const double rho = c / static_cast<double>(m - lag) / var;
    est.autocorrelation.push_back(rho);
    if (!(rho >= opts.min_correlation)) break;
    num += static_cast<double>(lag) * std::log(rho);
    den += static_cast<double>(lag * lag);
    ++est.lags_used;
  }
  if (est.lags_used == 0) throw ConvergenceError("autocorrelation below threshold at lag 1");
  est.gap = 1.0 - std::exp(num / den);
  return est;
}

SampleFormat parse_sample_format(const std::string& name) {
  if (name == "csv") return SampleFormat::csv;
  if (name == "hex") return SampleFormat::hex;
  throw ParseError("unknown sample format '" + name + "'");
}

void write_samples(std::ostream& out, const SampleSet& samples, SampleFormat format) {
  const nlohmann::json header = {{"n", samples.n},
                                 {"chains", samples.chains},
                                 {"steps", samples.steps},
                                 {"seed", samples.seed},
                                 {"samples_per_chain", samples.samples_per_chain()},
                                 {"format", format == SampleFormat::csv ? "csv" : "hex"}};
  out << "# " << header.dump() << '\n';
  for (int c = 0; c < samples.chains; ++c) {
    for (std::size_t r = 0; r < samples.samples_per_chain(); ++r) {
      const auto row = samples.sample(c, r);
      if (format == SampleFormat::hex) {
        out << hex_row(row) << '\n';
        continue;
      }
      for (int i = 0; i < samples.n; ++i) out << (i ? "," : "") << static_cast<int>(row[i]);
      out << '\n';
    }
  }
}

SampleSet read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError("missing sample header line");
  SampleSet set;
  std::size_t per_chain = 0;
  SampleFormat format = SampleFormat::csv;
  try {
    const auto header = nlohmann::json::parse(line.substr(2));
    set.n = header.at("n").get<int>();
    set.chains = header.at("chains").get<int>();
    set.steps = header.at("steps").get<std::uint64_t>();
    set.seed = header.at("seed").get<std::uint64_t>();
    per_chain = header.at("samples_per_chain").get<std::size_t>();
    format = parse_sample_format(header.at("format").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sample header: ") + e.what());
  }
  if (set.n < 1 || set.chains < 0) throw ParseError("sample header has invalid sizes");
  set.per_chain.resize(set.chains);
  for (int c = 0; c < set.chains; ++c) {
    auto& data = set.per_chain[c];
    data.reserve(per_chain * set.n);
    for (std::size_t r = 0; r < per_chain; ++r) {
      if (!std::getline(in, line)) throw ParseError("sample file ends early");
      if (format == SampleFormat::hex) {
        parse_hex_row(line, set.n, data);
      } else {
        parse_csv_row(line, set.n, data);
      }
    }
  }
  if (std::getline(in, line) && !line.empty()) throw ParseError("trailing rows in sample file");
  return set;
}

}  // namespace glauberlab::mc
