#include "carots/nnet/checkpoint.hpp"

#include "carots/error.hpp"

#include <fstream>

namespace carots::nnet {

namespace {
constexpr const char* kFormat = "carots-params/1";
}

nlohmann::json params_to_json(const ParamSet& params) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, p] : params) {
    nlohmann::json values = nlohmann::json::array();
    for (Index r = 0; r < p.value.rows(); ++r) {
      for (Index c = 0; c < p.value.cols(); ++c) values.push_back(p.value(r, c));
    }
    out[name] = {{"shape", {p.value.rows(), p.value.cols()}}, {"values", std::move(values)}};
  }
  return out;
}

ParamSet params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("checkpoint params must be an object");
  ParamSet params;
  for (const auto& [name, entry] : j.items()) {
    const auto& shape = entry.at("shape");
    const auto& values = entry.at("values");
    if (!shape.is_array() || shape.size() != 2) throw ParseError("bad shape for " + name);
    const Index rows = shape[0].get<Index>();
    const Index cols = shape[1].get<Index>();
    if (rows < 0 || cols < 0 || values.size() != static_cast<std::size_t>(rows * cols)) {
      throw ParseError("value count does not match shape for " + name);
    }
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) m(r, c) = values[k++].get<double>();
    }
    params.add(name, std::move(m));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params,
                     const nlohmann::json& meta) {
  nlohmann::json doc = {{"format", kFormat}, {"meta", meta}, {"params", params_to_json(params)}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != kFormat) {
    throw ParseError("checkpoint " + path.string() + " has unknown format");
  }
  return {params_from_json(doc.at("params")), doc.value("meta", nlohmann::json::object())};
}

}  // namespace carots::nnet
