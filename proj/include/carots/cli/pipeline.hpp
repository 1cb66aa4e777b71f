#pragma once

#include "carots/cli/config.hpp"
#include "carots/eval/analysis.hpp"
#include "carots/eval/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace carots::cli {

namespace fs = std::filesystem;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "CAROTS_OUTPUT_ROOT";

/// --out, else the config's output field, else $CAROTS_OUTPUT_ROOT, else
/// ./carots-out.
fs::path output_root(const ExperimentConfig& cfg, const std::optional<fs::path>& override_dir);

// Layout under the output root:
//   seed-<s>/data      train/val/test splits (raw), norm stats
//   seed-<s>/causal    causal checkpoint, report, log
//   seed-<s>/encoder   encoder checkpoint, log
//   seed-<s>/augment   augmentation preview
//   seed-<s>/scores/<mode>   per-variant score CSVs, detector summary
//   report/            aggregated metrics, stability and sweep tables
// Every stage directory holds a manifest.json with the stage, seed, config
// hash, file list and the effective config; each file in report/ has its own
// <file>.manifest.json.
struct Layout {
  fs::path root;

  fs::path seed_dir(std::uint64_t seed) const { return root / ("seed-" + std::to_string(seed)); }
  fs::path data_dir(std::uint64_t seed) const { return seed_dir(seed) / "data"; }
  fs::path causal_dir(std::uint64_t seed) const { return seed_dir(seed) / "causal"; }
  fs::path encoder_dir(std::uint64_t seed) const { return seed_dir(seed) / "encoder"; }
  fs::path augment_dir(std::uint64_t seed) const { return seed_dir(seed) / "augment"; }
  fs::path scores_dir(std::uint64_t seed, scoring::ScoreMode mode) const {
    return seed_dir(seed) / "scores" / scoring::to_string(mode);
  }
  fs::path report_dir() const { return root / "report"; }
};

inline constexpr const char* kManifestFile = "manifest.json";

void write_manifest(const fs::path& dir, const std::string& stage, const ExperimentConfig& cfg,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& files,
                    const nlohmann::json& extra = nlohmann::json::object(),
                    const std::string& name = kManifestFile);
/// Reads dir/manifest.json and checks its stage and config hash. Missing
/// manifests and hash mismatches raise ConfigError naming the command to run.
nlohmann::json read_manifest(const fs::path& dir, const std::string& stage, const ExperimentConfig& cfg);

/// Test series of one variant (raw units).
struct TestSplit {
  std::string name;
  data::LabeledSeries series;
};

struct Dataset {
  data::LabeledSeries train;
  data::LabeledSeries val;
  data::NormStats stats;
  std::vector<TestSplit> tests;
  /// Synthetic runs only: the test split before injection.
  std::optional<data::LabeledSeries> test_clean;

  data::WindowSet train_windows(Index w) const;
  data::WindowSet val_windows(Index w) const;
};

Dataset load_dataset(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);

void cmd_gen(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);
void cmd_discover(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);
void cmd_train(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);
void cmd_augment(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed, Index preview);
void cmd_score(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed, scoring::ScoreMode mode);
enum class ReportFormat { json, csv };
/// Aggregates the scores of every configured seed.
eval::MetricsReport cmd_report(const ExperimentConfig& cfg, const Layout& layout, scoring::ScoreMode mode,
                               ReportFormat format);
eval::StabilityReport cmd_stability(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);
/// Learning-rate x weight-decay grid for the encoder, selected by validation
/// loss. Writes the table and the config with the selected point.
nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed);
std::vector<eval::SweepRow> cmd_difficulty(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed,
                                           scoring::ScoreMode mode);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace carots::cli
