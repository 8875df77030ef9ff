#include "glauberlab/spin/io.hpp"

#include <fstream>

#include "glauberlab/common/errors.hpp"

namespace glauberlab::spin {

using nlohmann::json;

json to_json(const SpinHamiltonian& h) {
  json terms = json::array();
  for (const auto& [sites, coeff] : h.terms()) terms.push_back({{"sites", sites}, {"coeff", coeff}});
  return {{"n", h.n()}, {"terms", terms}};
}

SpinHamiltonian hamiltonian_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("hamiltonian must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (key != "n" && key != "terms") throw ParseError("unknown hamiltonian key '" + key + "'");
    const int n = j.at("n").get<int>();
    if (n < 0) throw ParseError("n must be nonnegative");
    std::map<SiteSet, double> terms;
    for (const auto& t : j.at("terms")) {
      SiteSet sites = t.at("sites").get<SiteSet>();
      const double coeff = t.at("coeff").get<double>();
      for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i] < 1 || sites[i] > n) throw ParseError("site " + std::to_string(sites[i]) + " out of range");
        if (i > 0 && sites[i] <= sites[i - 1]) throw ParseError("sites must be strictly increasing");
      }
      if (!terms.emplace(std::move(sites), coeff).second) throw ParseError("duplicate site set in terms");
    }
    return SpinHamiltonian(n, std::move(terms));
  } catch (const json::exception& e) {
    throw ParseError(std::string("hamiltonian: ") + e.what());
  }
}

SpinHamiltonian read_hamiltonian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return hamiltonian_from_json(j);
}

void write_hamiltonian(const SpinHamiltonian& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << to_json(h).dump(2) << '\n';
}

}  // namespace glauberlab::spin
