#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "glauberlab/spin/hamiltonian.hpp"

namespace glauberlab::spin {

nlohmann::json to_json(const SpinHamiltonian& h);
SpinHamiltonian hamiltonian_from_json(const nlohmann::json& j);

SpinHamiltonian read_hamiltonian(const std::string& path);
void write_hamiltonian(const SpinHamiltonian& h, const std::string& path);

}  // namespace glauberlab::spin
