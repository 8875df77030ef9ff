#include "glauberlab/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "glauberlab/common/errors.hpp"
#include "glauberlab/harness/suites.hpp"

namespace glauberlab::harness {

namespace {

using Json = nlohmann::json;

const char* kind_name(InstanceSpec::Kind k) {
  switch (k) {
    case InstanceSpec::Kind::random_hamiltonian: return "random-hamiltonian";
    case InstanceSpec::Kind::hamiltonian_file: return "hamiltonian";
    case InstanceSpec::Kind::random_subset: return "random-subset";
    case InstanceSpec::Kind::subset_file: return "subset";
    case InstanceSpec::Kind::pspin: return "pspin";
  }
  return "?";
}

InstanceSpec::Kind parse_kind(const std::string& name) {
  for (auto k : {InstanceSpec::Kind::random_hamiltonian, InstanceSpec::Kind::hamiltonian_file,
                 InstanceSpec::Kind::random_subset, InstanceSpec::Kind::subset_file, InstanceSpec::Kind::pspin}) {
    if (name == kind_name(k)) return k;
  }
  throw ParseError("config key \"instance.kind\": unknown instance kind \"" + name + "\"");
}

const std::set<std::string>& keys_for(InstanceSpec::Kind k) {
  static const std::set<std::string> random_h{"kind", "n", "n_min", "n_max", "max_degree", "law", "scale", "density"};
  static const std::set<std::string> random_s{"kind", "n", "n_min", "n_max", "k_min", "k_max", "sparse"};
  static const std::set<std::string> file{"kind", "path"};
  static const std::set<std::string> ps{"kind", "path", "spec"};
  switch (k) {
    case InstanceSpec::Kind::random_hamiltonian: return random_h;
    case InstanceSpec::Kind::random_subset: return random_s;
    case InstanceSpec::Kind::pspin: return ps;
    default: return file;
  }
}

template <typename T>
T field(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ParseError("config key \"" + where + key + "\": wrong type");
  }
}

int positive_int(const Json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number_integer()) throw ParseError("config key \"" + where + key + "\": expected an integer");
  const auto v = j.at(key).get<long long>();
  if (v < 1 || v > 1'000'000'000) throw ParseError("config key \"" + where + key + "\": must be positive");
  return static_cast<int>(v);
}

LawChoice parse_law(const std::string& s) {
  if (s == "gaussian") return LawChoice::gaussian;
  if (s == "exponential") return LawChoice::exponential;
  if (s == "mixed") return LawChoice::mixed;
  throw ParseError("config key \"instance.law\": expected gaussian, exponential or mixed");
}

void apply_overrides(InstanceSpec& spec, const Json& j) {
  const std::string where = "instance.";
  for (const auto& [key, _] : j.items()) {
    if (!keys_for(spec.kind).contains(key)) {
      throw ParseError("config key \"instance." + key + "\": not valid for instance kind " +
                       std::string(kind_name(spec.kind)));
    }
  }
  auto range = [&](int& lo, int& hi, const char* lo_key, const char* hi_key) {
    if (j.contains("n")) lo = hi = positive_int(j, "n", where);
    if (j.contains(lo_key)) lo = positive_int(j, lo_key, where);
    if (j.contains(hi_key)) hi = positive_int(j, hi_key, where);
    if (lo > hi) throw ParseError(std::string("config key \"instance.") + lo_key + "\": exceeds " + hi_key);
  };
  switch (spec.kind) {
    case InstanceSpec::Kind::random_hamiltonian: {
      auto& f = spec.hamiltonians;
      range(f.n_min, f.n_max, "n_min", "n_max");
      if (j.contains("max_degree")) {
        if (!j.at("max_degree").is_number_integer() || j.at("max_degree").get<int>() < 0) {
          throw ParseError("config key \"instance.max_degree\": expected a nonnegative integer");
        }
        f.max_degree = j.at("max_degree").get<int>();
      }
      if (j.contains("law")) f.law = parse_law(field<std::string>(j, "law", where));
      if (j.contains("scale")) {
        f.scale = field<double>(j, "scale", where);
        if (!(f.scale >= 0.0)) throw ParseError("config key \"instance.scale\": must be nonnegative");
      }
      if (j.contains("density")) {
        f.density = field<double>(j, "density", where);
        if (!(f.density > 0.0 && f.density <= 1.0)) throw ParseError("config key \"instance.density\": must lie in (0, 1]");
      }
      break;
    }
    case InstanceSpec::Kind::random_subset: {
      auto& f = spec.subsets;
      range(f.n_min, f.n_max, "n_min", "n_max");
      if (j.contains("k_min")) f.k_min = positive_int(j, "k_min", where);
      if (j.contains("k_max")) f.k_max = positive_int(j, "k_max", where);
      if (f.k_min > f.k_max) throw ParseError("config key \"instance.k_min\": exceeds k_max");
      if (j.contains("sparse")) f.sparse = field<bool>(j, "sparse", where);
      break;
    }
    case InstanceSpec::Kind::pspin:
      if (j.contains("spec") && j.contains("path")) {
        throw ParseError("config key \"instance.spec\": give exactly one of spec or path");
      }
      if (j.contains("spec")) {
        try {
          spec.pspin = pspin::spec_from_json(j.at("spec"));
        } catch (const ParseError& e) {
          throw ParseError(std::string("config key \"instance.spec\": ") + e.what());
        }
      }
      [[fallthrough]];
    default:
      if (j.contains("path")) {
        spec.path = field<std::string>(j, "path", where);
        if (!std::filesystem::exists(spec.path)) {
          throw ParseError("config key \"instance.path\": file not found: " + spec.path);
        }
      } else if (spec.kind != InstanceSpec::Kind::pspin) {
        throw ParseError("config key \"instance.path\": required for instance kind " + std::string(kind_name(spec.kind)));
      }
      break;
  }
}

}  // namespace

spin::CoefficientLaw law_for(LawChoice choice, int index) noexcept {
  switch (choice) {
    case LawChoice::gaussian: return spin::CoefficientLaw::gaussian;
    case LawChoice::exponential: return spin::CoefficientLaw::exponential;
    case LawChoice::mixed: break;
  }
  return index % 2 == 0 ? spin::CoefficientLaw::gaussian : spin::CoefficientLaw::exponential;
}

InstanceSpec resolve_instance(const ExperimentConfig& config, const InstanceSpec& fallback) {
  InstanceSpec spec = fallback;
  const Json& j = config.instance;
  if (j.contains("kind")) {
    const auto kind = parse_kind(field<std::string>(j, "kind", "instance."));
    if (kind != spec.kind) {
      spec = InstanceSpec{};
      spec.kind = kind;
    }
  }
  apply_overrides(spec, j);
  if (j.contains("kind") && spec.kind == InstanceSpec::Kind::pspin && !spec.pspin && spec.path.empty()) {
    throw ParseError("config key \"instance.spec\": a p-spin instance needs spec or path");
  }
  if (spec.kind == InstanceSpec::Kind::pspin && !spec.path.empty()) spec.pspin = pspin::read_spec(spec.path);
  return spec;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  static const std::set<std::string> known{"suite", "seed", "count", "tolerance", "threads", "out", "instance", "options"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ParseError("config key \"" + key + "\": unknown key");
  }
  ExperimentConfig c;
  if (!j.contains("suite")) throw ParseError("config key \"suite\": required");
  c.suite = field<std::string>(j, "suite", "");
  const SuiteInfo& info = suite_info(c.suite);
  if (j.contains("seed")) {
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() <= 0) ||
        seed.get<std::uint64_t>() == 0) {
      throw ParseError("config key \"seed\": must be a positive integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("count")) c.count = positive_int(j, "count", "");
  if (j.contains("tolerance")) {
    if (!j.at("tolerance").is_number()) throw ParseError("config key \"tolerance\": expected a number");
    c.tolerance = j.at("tolerance").get<double>();
    if (!(c.tolerance > 0.0) || !std::isfinite(c.tolerance)) {
      throw ParseError("config key \"tolerance\": must be positive");
    }
  }
  if (j.contains("threads")) {
    if (!j.at("threads").is_number_integer() || j.at("threads").get<std::int64_t>() < 0) throw ParseError("config key \"threads\": expected a nonnegative integer");
    c.threads = j.at("threads").get<unsigned>();
  }
  if (j.contains("out")) c.out = field<std::string>(j, "out", "");
  if (j.contains("instance")) {
    if (!j.at("instance").is_object()) throw ParseError("config key \"instance\": expected an object");
    if (info.instance_kinds.empty()) throw ParseError("config key \"instance\": suite " + c.suite + " takes no instance");
    c.instance = j.at("instance");
    if (c.instance.contains("kind")) {
      const auto kind = parse_kind(field<std::string>(c.instance, "kind", "instance."));
      if (std::find(info.instance_kinds.begin(), info.instance_kinds.end(), kind) == info.instance_kinds.end()) {
        throw ParseError("config key \"instance.kind\": suite " + c.suite + " does not accept " + kind_name(kind));
      }
    }
  }
  if (j.contains("options")) {
    if (!j.at("options").is_object()) throw ParseError("config key \"options\": expected an object");
    for (const auto& [key, _] : j.at("options").items()) {
      if (std::find(info.option_keys.begin(), info.option_keys.end(), key) == info.option_keys.end()) {
        throw ParseError("config key \"options." + key + "\": unknown option for suite " + c.suite);
      }
    }
    c.options = j.at("options");
  }
  // Surface instance errors at parse time.
  if (!info.instance_kinds.empty()) resolve_instance(c, info.default_instance);
  return c;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"suite", c.suite}, {"seed", c.seed}, {"threads", c.threads}};
  if (c.count != 0) j["count"] = c.count;
  if (c.tolerance != 0.0) j["tolerance"] = c.tolerance;
  if (!c.out.empty()) j["out"] = c.out;
  if (!c.instance.empty()) j["instance"] = c.instance;
  if (!c.options.empty()) j["options"] = c.options;
  return j;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = to_json(config);
  j.erase("out");
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace glauberlab::harness
