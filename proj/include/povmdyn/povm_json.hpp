#pragma once

#include <string>

#include <json.hpp>

#include "povmdyn/states.hpp"

namespace povmdyn {

// Matrix wire format: nested arrays of [re, im] pairs, row-major.
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Matrix& m);

Vector vector_from_json(const nlohmann::json& j);

// POVM file: {"dim": n, "effects": [matrix...], "labels": [...]}.
Povm povm_from_json(const nlohmann::json& j);
nlohmann::json povm_to_json(const Povm& povm);

Povm load_povm(const std::string& path);
void save_povm(const Povm& povm, const std::string& path);

nlohmann::json read_json_file(const std::string& path);

} // namespace povmdyn
