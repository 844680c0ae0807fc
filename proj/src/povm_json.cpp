#include "povmdyn/povm_json.hpp"

#include <fstream>

namespace povmdyn {

using nlohmann::json;

namespace {

Complex entry_from_json(const json& e) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
    throw ValidationError("matrix entry must be a [re, im] pair");
  }
  return Complex(e[0].get<double>(), e[1].get<double>());
}

} // namespace

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("matrix must be a non-empty array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ValidationError("matrix rows have inconsistent lengths");
    }
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = entry_from_json(row[static_cast<size_t>(c)]);
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("vector must be a non-empty array of [re, im] pairs");
  }
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = entry_from_json(j[static_cast<size_t>(i)]);
  }
  return v;
}

Povm povm_from_json(const json& j) {
  if (!j.is_object()) {
    throw ValidationError("POVM file must contain a JSON object");
  }
  if (!j.contains("effects")) {
    throw ValidationError("POVM file is missing the \"effects\" key");
  }
  if (!j["effects"].is_array() || j["effects"].empty()) {
    throw ValidationError("\"effects\" must be a non-empty array of matrices");
  }
  std::vector<Matrix> effects;
  for (const json& e : j["effects"]) {
    effects.push_back(matrix_from_json(e));
  }
  if (j.contains("dim")) {
    const Index dim = j["dim"].get<Index>();
    if (dim != effects[0].rows()) {
      throw ValidationError("declared dim " + std::to_string(dim) +
                            " differs from effect dimension " +
                            std::to_string(effects[0].rows()));
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    for (const json& l : j["labels"]) labels.push_back(l.get<std::string>());
  }
  return validate_povm(std::move(effects), std::move(labels));
}

json povm_to_json(const Povm& povm) {
  json j;
  j["dim"] = povm.dim;
  j["effects"] = json::array();
  for (const Matrix& f : povm.effects) j["effects"].push_back(matrix_to_json(f));
  j["labels"] = povm.labels;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

Povm load_povm(const std::string& path) {
  return povm_from_json(read_json_file(path));
}

void save_povm(const Povm& povm, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << povm_to_json(povm).dump(2) << "\n";
}

} // namespace povmdyn
