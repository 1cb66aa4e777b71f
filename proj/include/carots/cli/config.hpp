#pragma once

#include "carots/causal/causal_model.hpp"
#include "carots/contrastive/trainer.hpp"
#include "carots/scoring/scoring.hpp"
#include "carots/synthgen/benchmark.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace carots::cli {

using nnet::Index;
using nnet::Matrix;

enum class DataSource { synthetic, csv };

struct DataConfig {
  DataSource source = DataSource::synthetic;

  // Synthetic benchmark.
  synth::SystemKind system = synth::SystemKind::lorenz96;
  Index variables = 128;
  Index length = 40000;
  double train_fraction = 0.4;
  double val_fraction = 0.1;
  double forcing = 10.0;
  double dt = 0.05;
  Index var_lag = 2;
  double var_density = 0.1;
  double var_noise_std = 0.1;
  double anomaly_ratio = 0.01;
  Index affected_variables = 10;
  double anomaly_factor = 2.0;
  Index anomaly_radius = 5;
  double cg_amplitude = 1.5;
  double cg_frequency = 0.04;
  Index cg_harmonics = 5;

  // CSV files: training values (labels ignored) and a labeled test split.
  std::string train_values;
  std::string test_values;
  std::string test_labels;
  /// Trailing fraction of the training file held out for validation.
  double csv_val_fraction = 0.2;
  Index downsample = 1;
};

/// Effective experiment configuration. Every field has a default; `window`
/// and `distance` default per system (Lorenz96: 2 / l2, VAR: 4 / cosine,
/// CSV: 10 / l2) and are resolved by `resolve()`.
struct ExperimentConfig {
  DataConfig data;
  Index window = 0;  ///< 0 = system default
  causal::CausalConfig causal;
  contrastive::ContrastiveConfig contrastive;
  std::string distance = "auto";
  scoring::ScoreMode score_mode = scoring::ScoreMode::ensemble;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<double> sweep_learning_rates = {1e-3, 3e-4, 1e-4};
  std::vector<double> sweep_weight_decays = {1e-3, 1e-4, 0.0};
  std::vector<double> difficulty_factors = {1.0, 1.5, 2.0, 3.0, 5.0};
  std::string output;

  /// Fills system-dependent defaults and copies shared fields (window) into
  /// the component configs.
  void resolve();
  void validate() const;
  scoring::Distance resolved_distance() const;
};

ExperimentConfig default_config();
/// Unknown keys are rejected with ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a (64-bit) over the canonical dump of the sections that determine
/// trained artifacts: data, window, causal, encoder, contrastive, augment.
/// Output location, seeds, scoring and sweep settings are excluded.
std::string config_hash(const ExperimentConfig& cfg);
/// Hash of the sections a stage's outputs depend on: data for gen; data,
/// window and causal for discover; config_hash for every later stage.
std::string stage_hash(const ExperimentConfig& cfg, const std::string& stage);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace carots::cli
