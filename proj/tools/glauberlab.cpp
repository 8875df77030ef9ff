// Command-line front end: single-instance analysis, sampling, p-spin
// generation, learning and the verification suites.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/exact/bounds.hpp"
#include "glauberlab/exact/correlation.hpp"
#include "glauberlab/exact/entropy.hpp"
#include "glauberlab/exact/gibbs.hpp"
#include "glauberlab/exact/walk.hpp"
#include "glauberlab/harness/config.hpp"
#include "glauberlab/harness/suites.hpp"
#include "glauberlab/learn/pseudolikelihood.hpp"
#include "glauberlab/mc/sampler.hpp"
#include "glauberlab/pspin/model.hpp"
#include "glauberlab/spin/io.hpp"
#include "glauberlab/spin/random.hpp"
#include "glauberlab/spin/smoothness.hpp"

namespace gl = glauberlab;
using Json = nlohmann::json;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& dir, const std::string& name, const std::string& contents) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

// ------------------------------------------------------------------ analyze

struct AnalyzeArgs {
  std::string hamiltonian;
  int n = 0;
  double random_scale = 0.0;
  int max_degree = 2;
  std::uint64_t seed = 1;
  double alpha = 1.0;
  int tilts = 256;
  double eps = 0.25;
  bool at = false;
  bool mlsi = false;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  gl::spin::SpinHamiltonian h;
  if (!a.hamiltonian.empty()) {
    if (a.n != 0 || a.random_scale != 0.0) throw UsageError("--hamiltonian cannot be combined with --n or --random-scale");
    h = gl::spin::read_hamiltonian(a.hamiltonian);
  } else if (a.n > 0) {
    h = a.random_scale > 0.0
            ? gl::spin::random_hamiltonian({a.n, a.max_degree, gl::spin::CoefficientLaw::gaussian, a.random_scale, 1.0},
                                           a.seed)
            : gl::spin::SpinHamiltonian(a.n);
  } else {
    throw UsageError("analyze needs --hamiltonian FILE or --n N");
  }

  const auto table = gl::exact::gibbs_table(h);
  const auto op = gl::exact::glauber_operator(table);
  const double gap = gl::exact::spectral_gap(op);
  const double eta = gl::exact::spectral_independence_eta(table);
  const auto beta = h.n() <= 20 ? gl::spin::smoothness_beta_exhaustive(h) : gl::spin::smoothness_beta_sampled(h, 50, a.seed);
  const auto flc = gl::exact::flc_falsify(table, a.alpha, a.tilts, a.seed);
  const auto bounds = gl::exact::mixing_time_bounds(gap, 1.0, table.min_prob(), a.eps);

  Json report{{"n", h.n()},
              {"gap", gap},
              {"eta", eta},
              {"eta_bound", 1.0 / (h.n() * gap)},
              {"beta", beta.beta},
              {"beta_method", gl::spin::to_string(beta.method)},
              {"min_prob", table.min_prob()},
              {"mixing", {{"eps", a.eps}, {"lower_gamma", bounds.lower_gamma}, {"upper_gamma", bounds.upper_gamma}}}};
  Json flc_json{{"alpha", a.alpha}, {"pass", flc.pass}, {"tilts_checked", flc.tilts_checked},
                {"max_eigenvalue", flc.max_eigenvalue}};
  if (flc.witness) {
    flc_json["witness"] = {{"lambda", flc.witness->lambda},
                           {"eigenvalue", flc.witness->eigenvalue},
                           {"tilt_index", flc.witness->tilt_index}};
  }
  report["flc"] = flc_json;
  gl::exact::SearchOptions so;
  so.seed = a.seed;
  if (a.at) report["at_lower_bound"] = gl::exact::at_constant_search(table, so).value;
  if (a.mlsi) {
    const double rho = gl::exact::mlsi_search(table, op, so).value;
    report["mlsi_upper_bound"] = rho;
    report["mixing"]["upper_mlsi_estimate"] = gl::exact::mixing_time_bounds(gap, rho, table.min_prob(), a.eps).upper_mlsi;
  }
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!a.out.empty()) write_file(a.out, "analyze.json", text);
  return 0;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string hamiltonian;
  std::string pspin;
  int chains = 1;
  std::uint64_t steps = 10000;
  std::int64_t burn_in = -1;
  std::uint64_t thin = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string format = "csv";
  bool tv = false;
  std::uint64_t gap_steps = 0;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  if (a.hamiltonian.empty() == a.pspin.empty()) throw UsageError("sample needs exactly one of --hamiltonian or --pspin");
  std::unique_ptr<gl::mc::FieldModel> model;
  std::optional<gl::spin::SpinHamiltonian> h;
  if (!a.hamiltonian.empty()) {
    h = gl::spin::read_hamiltonian(a.hamiltonian);
    model = std::make_unique<gl::mc::HamiltonianModel>(*h);
  } else {
    model = std::make_unique<gl::mc::PSpinModel>(gl::pspin::read_spec(a.pspin));
  }
  if (a.tv && !h) throw UsageError("--tv needs --hamiltonian");
  const auto format = gl::mc::parse_sample_format(a.format);

  gl::mc::RunOptions opts;
  opts.chains = a.chains;
  opts.burn_in = a.burn_in >= 0 ? static_cast<std::uint64_t>(a.burn_in) : gl::mc::default_burn_in(model->n());
  opts.steps = opts.burn_in + a.steps;
  opts.thin = a.thin;
  opts.seed = a.seed;
  opts.threads = a.threads;
  const auto run = gl::mc::run_chains(*model, opts);

  Json summary{{"n", model->n()},
               {"chains", a.chains},
               {"steps", opts.steps},
               {"burn_in", opts.burn_in},
               {"thin", a.thin},
               {"seed", a.seed},
               {"samples", run.samples.total_samples()},
               {"mean_magnetization", run.summary.mean_magnetization},
               {"site_means", run.summary.site_means},
               {"chain_magnetization", run.summary.chain_magnetization}};
  if (a.tv) summary["tv_to_exact"] = gl::mc::tv_to_exact(run.samples, gl::exact::gibbs_table(*h));
  if (a.gap_steps > 0) {
    const auto traj = gl::mc::run_trajectory(*model, a.gap_steps, opts.burn_in, a.seed,
                                             [](std::span<const int> s) { return std::accumulate(s.begin(), s.end(), 0.0); });
    const auto est = gl::mc::gap_estimate_autocorr(traj);
    summary["gap_estimate"] = {{"gap", est.gap}, {"lags_used", est.lags_used}};
  }

  if (a.out.empty()) {
    gl::mc::write_samples(std::cout, run.samples, format);
    std::cerr << summary.dump(2) << '\n';
  } else {
    std::ostringstream samples;
    gl::mc::write_samples(samples, run.samples, format);
    write_file(a.out, "samples.txt", samples.str());
    write_file(a.out, "sample_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------ pspin-gen

struct PSpinArgs {
  int N = 0;
  std::vector<std::string> betas;
  std::uint64_t seed = 1;
  std::string out;
};

int run_pspin_gen(const PSpinArgs& a) {
  gl::pspin::PSpinSpec spec;
  spec.N = a.N;
  spec.seed = a.seed;
  for (const auto& b : a.betas) {
    const auto colon = b.find(':');
    if (colon == std::string::npos) throw UsageError("--beta expects p:value, got " + b);
    try {
      spec.betas[std::stoi(b.substr(0, colon))] = std::stod(b.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw UsageError("--beta expects p:value, got " + b);
    }
  }
  spec.validate();
  const auto norms = gl::pspin::temperature_norms(spec);
  Json report{{"spec", gl::pspin::to_json(spec)},
              {"beta0", norms.beta0},
              {"beta", norms.beta},
              {"energy_variance", gl::pspin::energy_variance(spec)}};
  const bool materialize = spec.N <= gl::pspin::kMaterializeMaxSites && spec.max_order() <= gl::pspin::kMaterializeMaxOrder;
  report["materialized"] = materialize;
  if (!a.out.empty()) {
    write_file(a.out, "pspin_spec.json", gl::pspin::to_json(spec).dump(2) + "\n");
    if (materialize) gl::spin::write_hamiltonian(gl::pspin::sample_pspin(spec), (std::filesystem::path(a.out) / "hamiltonian.json").string());
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------------ learn

struct LearnArgs {
  std::string samples;
  std::string truth;
  double radius = 5.0;
  int max_iter = 5000;
  std::vector<std::size_t> m_grid;
  int seeds = 5;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

gl::learn::IsingParams read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gl::ParseError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw gl::ParseError(path + ": " + e.what());
  }
  return gl::learn::params_from_json(j);
}

int run_learn(const LearnArgs& a) {
  gl::learn::FitOptions fo;
  fo.radius = a.radius;
  fo.max_iter = a.max_iter;
  fo.threads = a.threads;
  if (!a.m_grid.empty()) {
    if (a.truth.empty() || !a.samples.empty()) throw UsageError("--m-grid needs --truth and no --samples");
    gl::learn::LearningCurveOptions lo;
    lo.m_grid = a.m_grid;
    lo.fit = fo;
    for (int s = 0; s < a.seeds; ++s) lo.seeds.push_back(gl::hash_words({a.seed, static_cast<std::uint64_t>(s)}));
    const auto curve = gl::learn::learning_curve(read_params(a.truth), lo);
    std::cout << curve.csv();
    if (!a.out.empty()) write_file(a.out, "learning_curve.csv", curve.csv());
    return 0;
  }
  if (a.samples.empty()) throw UsageError("learn needs --samples FILE, or --truth with --m-grid");
  std::ifstream in(a.samples);
  if (!in) throw gl::ParseError("cannot open " + a.samples);
  const auto x = gl::learn::SampleMatrix::from_samples(gl::mc::read_samples(in));
  const auto fit = gl::learn::fit_pl(x, fo);
  Json j = gl::learn::to_json(fit);
  if (!a.truth.empty()) {
    const auto truth = read_params(a.truth);
    j["exact_kl"] = gl::learn::exact_kl(gl::exact::gibbs_table(truth.hamiltonian()), fit.params);
  }
  std::cout << j.dump(2) << '\n';
  if (!a.out.empty()) write_file(a.out, "fit.json", gl::learn::to_json(fit).dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------ suites

int finish_suite(const gl::harness::ExperimentConfig& config) {
  const auto report = gl::harness::run_suite(config);
  if (!config.out.empty()) gl::harness::write_report(report, config.out);
  else std::cout << report.to_json().dump(2) << '\n';
  gl::harness::print_summary(report, std::cerr);
  return report.pass() ? 0 : kExitFailedChecks;
}

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 1;
  int count = 0;
  int n = 0;
  double tolerance = 0.0;
  unsigned threads = 0;
  std::string out;
  std::string config;
  bool list = false;
};

int run_verify(const VerifyArgs& a, const CLI::App& cmd) {
  if (a.list) {
    for (const auto& s : gl::harness::suites()) std::cout << s.name << "  " << s.summary << '\n';
    return 0;
  }
  Json j = Json::object();
  if (!a.config.empty()) j = gl::harness::to_json(gl::harness::read_config(a.config));
  if (!a.suite.empty()) {
    if (j.contains("suite") && j["suite"] != a.suite) throw UsageError("suite " + a.suite + " differs from the config file");
    j["suite"] = a.suite;
  }
  if (!j.contains("suite")) throw UsageError("verify needs a suite name (see verify --list)");
  const std::string suite = j["suite"];
  if (a.config.empty() || cmd.count("--seed") != 0) j["seed"] = a.seed;
  if (a.config.empty() || cmd.count("--threads") != 0) j["threads"] = a.threads;
  if (cmd.count("--count") != 0) j["count"] = a.count;
  if (cmd.count("--tolerance") != 0) j["tolerance"] = a.tolerance;
  if (!a.out.empty()) j["out"] = a.out;
  if (cmd.count("--n") != 0) {
    const auto& info = gl::harness::suite_info(suite);
    const bool random = !info.instance_kinds.empty() &&
                        (info.instance_kinds.front() == gl::harness::InstanceSpec::Kind::random_hamiltonian ||
                         info.instance_kinds.front() == gl::harness::InstanceSpec::Kind::random_subset);
    if (!random) throw UsageError("--n is not supported by suite " + suite);
    if (!j.contains("instance")) j["instance"] = Json::object();
    j["instance"].erase("n_min");
    j["instance"].erase("n_max");
    j["instance"]["n"] = a.n;
  }
  return finish_suite(gl::harness::config_from_json(j));
}

struct RunArgs {
  std::string config;
  std::string out;
  int threads = -1;
};

int run_config(const RunArgs& a) {
  auto config = gl::harness::read_config(a.config);
  if (!a.out.empty()) config.out = a.out;
  if (a.threads >= 0) config.threads = static_cast<unsigned>(a.threads);
  return finish_suite(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and sampled diagnostics for Glauber dynamics on spin systems"};
  app.set_version_flag("--version", GLAUBERLAB_VERSION);
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Exact gap, eta, smoothness, FLC search and mixing bounds of one instance");
  an->add_option("--hamiltonian", analyze.hamiltonian, "Hamiltonian JSON file")->check(CLI::ExistingFile);
  an->add_option("--n", analyze.n, "Number of sites (zero Hamiltonian unless --random-scale)")->check(CLI::Range(1, 14));
  an->add_option("--random-scale", analyze.random_scale, "Random Gaussian Hamiltonian with this scale")->check(CLI::NonNegativeNumber);
  an->add_option("--max-degree", analyze.max_degree, "Term degree of the random Hamiltonian")->check(CLI::Range(1, 14));
  an->add_option("--seed", analyze.seed, "Seed");
  an->add_option("--alpha", analyze.alpha, "FLC exponent")->check(CLI::PositiveNumber);
  an->add_option("--tilts", analyze.tilts, "Random tilts for the FLC search")->check(CLI::NonNegativeNumber);
  an->add_option("--eps", analyze.eps, "Mixing threshold")->check(CLI::Range(1e-12, 0.5));
  an->add_flag("--at", analyze.at, "Also search for the approximate tensorization constant");
  an->add_flag("--mlsi", analyze.mlsi, "Also search for the modified log-Sobolev constant");
  an->add_option("--out", analyze.out, "Output directory");

  SampleArgs sample;
  auto* sa = app.add_subcommand("sample", "Run Glauber chains and write samples");
  sa->add_option("--hamiltonian", sample.hamiltonian, "Hamiltonian JSON file")->check(CLI::ExistingFile);
  sa->add_option("--pspin", sample.pspin, "p-spin spec JSON file")->check(CLI::ExistingFile);
  sa->add_option("--chains", sample.chains, "Independent chains")->check(CLI::Range(1, 1 << 16));
  sa->add_option("--steps", sample.steps, "Updates per chain after burn-in")->check(CLI::PositiveNumber);
  sa->add_option("--burn-in", sample.burn_in, "Updates discarded per chain (default: heuristic)")->check(CLI::NonNegativeNumber);
  sa->add_option("--thin", sample.thin, "Record every k-th update")->check(CLI::PositiveNumber);
  sa->add_option("--seed", sample.seed, "Seed");
  sa->add_option("--threads", sample.threads, "Worker threads (0: all)");
  sa->add_option("--format", sample.format, "Sample format")->check(CLI::IsMember({"csv", "hex"}));
  sa->add_flag("--tv", sample.tv, "Report total variation to the exact table");
  sa->add_option("--gap-steps", sample.gap_steps, "Trajectory length for the autocorrelation gap estimate");
  sa->add_option("--out", sample.out, "Output directory (default: samples on stdout)");

  PSpinArgs ps;
  auto* pg = app.add_subcommand("pspin-gen", "Write a p-spin spec and, when small enough, its Hamiltonian");
  pg->add_option("--N", ps.N, "Number of sites")->required()->check(CLI::PositiveNumber);
  pg->add_option("--beta", ps.betas, "Interaction order and temperature as p:value (repeatable)")->required();
  pg->add_option("--seed", ps.seed, "Disorder seed");
  pg->add_option("--out", ps.out, "Output directory");

  LearnArgs learn;
  auto* le = app.add_subcommand("learn", "Pseudolikelihood fit or exact-KL learning curve");
  le->add_option("--samples", learn.samples, "Sample file written by `sample`")->check(CLI::ExistingFile);
  le->add_option("--truth", learn.truth, "True parameters JSON {J, h}")->check(CLI::ExistingFile);
  le->add_option("--radius", learn.radius, "Bound on l1 rows of J and on |h|")->check(CLI::NonNegativeNumber);
  le->add_option("--max-iter", learn.max_iter, "Iteration cap")->check(CLI::NonNegativeNumber);
  le->add_option("--m-grid", learn.m_grid, "Sample sizes for a learning curve")->delimiter(',');
  le->add_option("--seeds", learn.seeds, "Seeds per sample size")->check(CLI::PositiveNumber);
  le->add_option("--seed", learn.seed, "Seed");
  le->add_option("--threads", learn.threads, "Worker threads (0: all)");
  le->add_option("--out", learn.out, "Output directory");

  VerifyArgs verify;
  auto* ve = app.add_subcommand("verify", "Run a named verification suite");
  ve->add_option("suite", verify.suite, "Suite name");
  ve->add_flag("--list", verify.list, "List suites");
  ve->add_option("--config", verify.config, "Config file; flags override its values")->check(CLI::ExistingFile);
  ve->add_option("--seed", verify.seed, "Seed")->check(CLI::PositiveNumber);
  ve->add_option("--count", verify.count, "Number of instances")->check(CLI::PositiveNumber);
  ve->add_option("--n", verify.n, "Fix the instance size")->check(CLI::PositiveNumber);
  ve->add_option("--tolerance", verify.tolerance, "Check tolerance")->check(CLI::PositiveNumber);
  ve->add_option("--threads", verify.threads, "Worker threads (0: all)");
  ve->add_option("--out", verify.out, "Report directory (default: report on stdout)");

  RunArgs run;
  auto* ru = app.add_subcommand("run", "Run a suite from a JSON config");
  ru->add_option("--config", run.config, "Config file")->required()->check(CLI::ExistingFile);
  ru->add_option("--out", run.out, "Report directory (overrides the config)");
  ru->add_option("--threads", run.threads, "Worker threads (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*an) return run_analyze(analyze);
    if (*sa) return run_sample(sample);
    if (*pg) return run_pspin_gen(ps);
    if (*le) return run_learn(learn);
    if (*ve) return run_verify(verify, *ve);
    if (*ru) return run_config(run);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const gl::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return kExitUsage;
}
