#include "carots/eval/analysis.hpp"

#include "carots/error.hpp"
#include "carots/eval/metrics.hpp"
#include "carots/synthgen/benchmark.hpp"

#include <cmath>

namespace carots::eval {

std::vector<SweepRow> difficulty_sweep(const scoring::Detector& detector, const data::LabeledSeries& test_clean,
                                       const data::NormStats& stats, const std::vector<synth::AnomalySpec>& specs,
                                       const std::vector<double>& factors, scoring::ScoreMode mode) {
  std::vector<SweepRow> rows;
  for (double factor : factors) {
    if (!(factor > 0.0)) throw ConfigError("difficulty factors must be positive");
    SweepRow row;
    row.factor = factor;
    std::vector<synth::AnomalySpec> scaled = specs;
    for (synth::AnomalySpec& spec : scaled) spec.factor = factor;
    const auto variants = synth::inject_test_variants(test_clean, scaled);
    for (const synth::TestVariant& v : variants) {
      const data::LabeledSeries normalized = data::znormalize(v.injection.series, stats);
      const data::WindowSet ws = data::make_windows(normalized, detector.encoder.window());
      const scoring::ScoreSeries s = scoring::score_dataset(ws, detector, mode);
      row.auroc.emplace_back(synth::to_string(v.kind), auroc(s.score, s.labels));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    nlohmann::json a = nlohmann::json::object();
    for (const auto& [name, v] : r.auroc) a[name] = v;
    out.push_back({{"factor", r.factor}, {"auroc", a}});
  }
  return out;
}

double flattened_cosine(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("gate matrices differ in shape");
  const double denom = a.norm() * b.norm();
  if (!(denom > 0.0)) throw NumericalError("cosine similarity of a zero gate matrix");
  return a.cwiseProduct(b).sum() / denom;
}

StabilityReport causal_stability_report(const data::LabeledSeries& train, const causal::CausalConfig& cfg) {
  cfg.validate();
  const Index quarter = train.length() / 4;
  if (quarter < cfg.window + 1) {
    throw ConfigError("quarters of " + std::to_string(quarter) + " rows are too short for window " +
                      std::to_string(cfg.window) + " (need at least " + std::to_string(cfg.window + 1) + ")");
  }
  StabilityReport r;
  for (Index q = 0; q < 4; ++q) {
    const data::WindowSet ws = data::make_windows(data::slice(train, q * quarter, quarter), cfg.window);
    r.gates.push_back(causal::train_causal_discoverer(ws, cfg).model.gates());
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      r.pairs.push_back({i + 1, j + 1, flattened_cosine(r.gates[static_cast<std::size_t>(i)],
                                                        r.gates[static_cast<std::size_t>(j)])});
    }
  }
  return r;
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"pair", "Q" + std::to_string(p.first) + "vsQ" + std::to_string(p.second)}, {"cosine", p.cosine}});
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const Matrix& g : r.gates) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < g.rows(); ++i) {
      std::vector<double> row;
      for (Index j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
      rows.push_back(row);
    }
    gates.push_back(rows);
  }
  return {{"pairs", pairs}, {"gates", gates}};
}

}  // namespace carots::eval
