#pragma once

#include "carots/eval/metrics.hpp"
#include "carots/scoring/scoring.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carots::eval {

/// Column order of the synthetic per-type table.
const std::vector<std::string>& synthetic_variants();

struct VariantResult {
  std::string name;
  /// Empty when the variant was not scored.
  std::optional<MetricSet> metrics;
};

/// Metrics of one seed's scored test variants.
struct RunReport {
  std::uint64_t seed = 0;
  std::vector<VariantResult> variants;
  /// Mean AUROC over the present variants; empty if none is present.
  std::optional<double> average_auroc;
};

/// Variants listed in `expected` come first, in order, and are marked absent
/// when missing from `scored`; any other scored variants follow by name.
RunReport per_type_report(std::uint64_t seed, const std::map<std::string, scoring::ScoreSeries>& scored,
                          const std::vector<std::string>& expected = synthetic_variants());

struct MeanStd {
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

struct MetricsReport {
  struct Row {
    std::string variant;
    /// False unless every run has the variant; the statistics are then empty.
    bool present = false;
    MeanStd auroc;
    MeanStd auprc;
    MeanStd best_f1;
  };
  std::vector<std::uint64_t> seeds;
  std::vector<RunReport> runs;
  std::vector<Row> rows;
  std::optional<MeanStd> average_auroc;
};

/// Mean and std over exactly the given runs. Runs must list the same variants
/// in the same order and have distinct seeds.
MetricsReport aggregate(std::vector<RunReport> runs);

nlohmann::json to_json(const MetricsReport& r);
/// Columns variant,seed,auroc,auprc,best_f1,best_threshold; one row per run
/// and variant, then "mean" and "std" rows per present variant, then AVG rows.
void write_report_csv(std::ostream& out, const MetricsReport& r);

}  // namespace carots::eval
