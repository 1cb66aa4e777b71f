#pragma once

#include "carots/causal/causal_model.hpp"
#include "carots/scoring/scoring.hpp"
#include "carots/synthgen/anomaly.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace carots::eval {

using nnet::Index;
using nnet::Matrix;

struct SweepRow {
  double factor = 0.0;
  /// AUROC per variant, in the order of the default anomaly specs.
  std::vector<std::pair<std::string, double>> auroc;
};

/// Re-injects each base spec into the clean (unnormalized) test series with
/// its factor replaced by each difficulty factor, normalizes with the training
/// stats and scores with the frozen detector. One row per factor.
std::vector<SweepRow> difficulty_sweep(const scoring::Detector& detector, const data::LabeledSeries& test_clean,
                                       const data::NormStats& stats, const std::vector<synth::AnomalySpec>& specs,
                                       const std::vector<double>& factors, scoring::ScoreMode mode);

nlohmann::json to_json(const std::vector<SweepRow>& rows);

struct StabilityReport {
  /// Gate matrix of the model trained on each chronological quarter.
  std::vector<Matrix> gates;
  struct Pair {
    int first = 0;
    int second = 0;
    double cosine = 0.0;
  };
  /// Q1vsQ2, Q1vsQ3, Q1vsQ4, Q2vsQ3, Q2vsQ4, Q3vsQ4.
  std::vector<Pair> pairs;
};

/// Splits the series into four disjoint time-ordered quarters (trailing rows
/// that do not divide evenly are dropped), trains one causal model per quarter
/// with the same config and compares the flattened gate matrices.
StabilityReport causal_stability_report(const data::LabeledSeries& train, const causal::CausalConfig& cfg);

double flattened_cosine(const Matrix& a, const Matrix& b);

nlohmann::json to_json(const StabilityReport& r);

}  // namespace carots::eval
