#pragma once

#include "carots/nnet/param_set.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace carots::nnet {

// Checkpoint layout:
//   {"format": "carots-params/1",
//    "meta": {...},
//    "params": {"<name>": {"shape": [rows, cols], "values": [row-major...]}}}
// Doubles are written in shortest round-trip decimal form, so save/load is bit-exact.

nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params,
                     const nlohmann::json& meta);

struct Checkpoint {
  ParamSet params;
  nlohmann::json meta;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace carots::nnet
