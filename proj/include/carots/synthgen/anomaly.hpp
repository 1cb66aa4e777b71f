#pragma once

#include "carots/dataio/series.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace carots::synth {

using data::Index;
using data::LabeledSeries;

enum class AnomalyKind { point_global, point_contextual, collective_trend, collective_global };

/// "PG", "PC", "CT", "CG".
std::string to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& s);
const std::vector<AnomalyKind>& all_anomaly_kinds();

enum class Split { train, val, test };

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::point_global;
  /// Target fraction of labeled timesteps.
  double anomaly_ratio = 0.01;
  /// Explicit affected variables. When unset, `affected_count` are drawn at random.
  std::optional<std::vector<Index>> affected_variables;
  Index affected_count = 10;
  /// Difficulty factor (PG/PC/CT).
  double factor = 2.0;
  Index radius = 5;
  /// Square-wave amplitude, frequency and harmonic count (CG).
  double cg_amplitude = 1.5;
  double cg_frequency = 0.04;
  Index cg_harmonics = 5;
  /// Which benchmark split this spec targets; only `test` is accepted.
  Split split = Split::test;
  std::uint64_t seed = 0;
  /// When non-empty, these event centers are used instead of random ones.
  std::vector<Index> event_times;

  void validate(Index length, Index variables) const;
};

/// One modified cell, so an injection can be undone exactly.
struct InjectionEdit {
  Index t = 0;
  Index variable = 0;
  double before = 0.0;
  double after = 0.0;
};

struct InjectionResult {
  LabeledSeries series;
  std::vector<InjectionEdit> edits;
  std::vector<Index> event_times;
  std::vector<Index> variables;
  data::Labels labels_before;
};

// Each event at center t_a touches every affected variable. Point kinds label
// t_a; collective kinds label [t_a - r, t_a + r] clipped to the series.

/// x = mu_global + factor * sigma_global (population stats of the clean series).
InjectionResult inject_point_global(const LabeledSeries& s, const AnomalySpec& spec);
/// x = mu_local + factor * sigma_local over [t_a - r, t_a + r] of the clean series.
InjectionResult inject_point_contextual(const LabeledSeries& s, const AnomalySpec& spec);
/// x += sign * factor * (t - (t_a - r)), sign = +-1 per (event, variable).
InjectionResult inject_collective_trend(const LabeledSeries& s, const AnomalySpec& spec);
/// x += sum_{k<L} A / (2k+1) * sin(2 pi f (2k+1) t).
InjectionResult inject_collective_global(const LabeledSeries& s, const AnomalySpec& spec);

/// Dispatches on spec.kind.
InjectionResult inject(const LabeledSeries& s, const AnomalySpec& spec);

/// Undoes the recorded edits and restores the pre-injection labels.
LabeledSeries revert(const InjectionResult& r);

/// Square-wave offset added by the CG injector at absolute step t.
double square_wave_offset(double amplitude, double frequency, Index harmonics, Index t);

/// Number of events needed to reach the requested labeled ratio.
Index event_count(const AnomalySpec& spec, Index length);

}  // namespace carots::synth
