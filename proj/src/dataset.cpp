#include "tdnn/dataset.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace tdnn {

using nlohmann::json;

Record parse_record(const std::string& line, int line_number) {
  const auto fail = [line_number](const std::string& msg) -> std::runtime_error {
    return std::runtime_error("line " + std::to_string(line_number) + ": " + msg);
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw fail(std::string("invalid record: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("atoms") || !doc.contains("label")) {
    throw fail("record must be an object with \"atoms\" and \"label\"");
  }
  if (!doc["atoms"].is_array() || doc["atoms"].empty()) {
    throw fail("\"atoms\" must be a nonempty array");
  }
  if (!doc["label"].is_number()) throw fail("\"label\" must be a number");

  std::vector<Atom> atoms;
  atoms.reserve(doc["atoms"].size());
  int dim = -1;
  for (const auto& a : doc["atoms"]) {
    if (!a.is_object() || !a.contains("x") || !a.contains("w")) {
      throw fail("atom must be an object with \"x\" and \"w\"");
    }
    if (!a["x"].is_array() || a["x"].empty()) throw fail("atom \"x\" must be a nonempty array");
    if (!a["w"].is_number()) throw fail("atom \"w\" must be a number");
    Point x(static_cast<Eigen::Index>(a["x"].size()));
    for (size_t i = 0; i < a["x"].size(); ++i) {
      if (!a["x"][i].is_number()) throw fail("atom coordinates must be numbers");
      x(static_cast<Eigen::Index>(i)) = a["x"][i].get<double>();
    }
    if (dim < 0) {
      dim = static_cast<int>(x.size());
    } else if (static_cast<int>(x.size()) != dim) {
      throw fail("atom dimensions differ within the record");
    }
    const double w = a["w"].get<double>();
    if (!(w > 0.0)) throw fail("atom weight must be > 0");
    atoms.push_back({std::move(x), w});
  }
  try {
    return {ParticleMeasure(std::move(atoms), dim), doc["label"].get<double>()};
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
}

std::string format_record(const Record& record) {
  json atoms = json::array();
  for (const Atom& a : record.measure.atoms()) {
    json x = json::array();
    for (Eigen::Index i = 0; i < a.location.size(); ++i) x.push_back(a.location(i));
    atoms.push_back({{"x", std::move(x)}, {"w", a.weight}});
  }
  return json{{"atoms", std::move(atoms)}, {"label", record.label}}.dump();
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  Dataset data;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    data.push_back(parse_record(line, line_number));
  }
  if (data.empty()) throw std::runtime_error("dataset is empty: " + path);
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const Record& r : data) out << format_record(r) << '\n';
  if (!out) throw std::runtime_error("failed writing dataset: " + path);
}

}  // namespace tdnn
