#pragma once

#include "carots/synthgen/anomaly.hpp"
#include "carots/synthgen/systems.hpp"

#include <string>
#include <vector>

namespace carots::synth {

enum class SystemKind { lorenz96, var };

std::string to_string(SystemKind s);
SystemKind parse_system_kind(const std::string& s);

struct BenchmarkConfig {
  SystemKind system = SystemKind::lorenz96;
  Lorenz96Config lorenz;
  VarConfig var;
  /// Chronological split fractions; the test split takes the remainder.
  double train_fraction = 0.4;
  double val_fraction = 0.1;
  /// One spec per test variant.
  std::vector<AnomalySpec> anomalies;

  Index total_length() const;
  Index variables() const;
};

struct TestVariant {
  AnomalyKind kind = AnomalyKind::point_global;
  InjectionResult injection;
};

struct Benchmark {
  LabeledSeries train;
  LabeledSeries val;
  LabeledSeries test_clean;
  std::vector<TestVariant> variants;
  /// Ground-truth parent matrix of the generating system.
  Matrix ground_truth;
};

/// The four default variants: ratio 0.01, 10 affected variables, r = 5,
/// factor `factor`, CG with A = 1.5, f = 0.04, L = 5. Seeds derived from `seed`.
std::vector<AnomalySpec> default_anomaly_specs(std::uint64_t seed, double factor = 2.0);

/// Generates the series, splits it train/val/test and injects each spec into
/// its own copy of the test split only.
Benchmark build_synthetic_benchmark(const BenchmarkConfig& cfg);

/// Regenerates only the test variants (same series, new specs).
std::vector<TestVariant> inject_test_variants(const LabeledSeries& test_clean,
                                              const std::vector<AnomalySpec>& specs);

}  // namespace carots::synth
