#include "carots/synthgen/benchmark.hpp"

#include "carots/error.hpp"

#include <cmath>

namespace carots::synth {

std::string to_string(SystemKind s) { return s == SystemKind::lorenz96 ? "lorenz96" : "var"; }

SystemKind parse_system_kind(const std::string& s) {
  if (s == "lorenz96") return SystemKind::lorenz96;
  if (s == "var") return SystemKind::var;
  throw ConfigError("unknown system '" + s + "' (expected lorenz96 or var)");
}

Index BenchmarkConfig::total_length() const {
  return system == SystemKind::lorenz96 ? lorenz.length : var.length;
}

Index BenchmarkConfig::variables() const {
  return system == SystemKind::lorenz96 ? lorenz.variables : var.variables;
}

std::vector<AnomalySpec> default_anomaly_specs(std::uint64_t seed, double factor) {
  std::vector<AnomalySpec> specs;
  std::uint64_t k = 0;
  for (AnomalyKind kind : all_anomaly_kinds()) {
    AnomalySpec s;
    s.kind = kind;
    s.factor = factor;
    s.seed = seed * 1000003ULL + (++k);
    specs.push_back(s);
  }
  return specs;
}

std::vector<TestVariant> inject_test_variants(const LabeledSeries& test_clean,
                                              const std::vector<AnomalySpec>& specs) {
  std::vector<TestVariant> out;
  out.reserve(specs.size());
  for (const AnomalySpec& spec : specs) out.push_back({spec.kind, inject(test_clean, spec)});
  return out;
}

Benchmark build_synthetic_benchmark(const BenchmarkConfig& cfg) {
  if (!(cfg.train_fraction > 0.0 && cfg.val_fraction > 0.0 &&
        cfg.train_fraction + cfg.val_fraction < 1.0)) {
    throw ConfigError("benchmark split fractions must be positive and leave room for a test split");
  }
  for (const AnomalySpec& spec : cfg.anomalies) {
    if (spec.split != Split::test) {
      throw ConfigError("anomalies may only be injected into the test split");
    }
  }

  Benchmark b;
  LabeledSeries full;
  if (cfg.system == SystemKind::lorenz96) {
    full = generate_lorenz96(cfg.lorenz);
    b.ground_truth = lorenz96_ground_truth(cfg.lorenz.variables);
  } else {
    const auto coeffs = cfg.var.resolved_coefficients();
    VarConfig resolved = cfg.var;
    resolved.coefficients = coeffs;
    full = generate_var(resolved);
    b.ground_truth = var_ground_truth(coeffs);
  }

  const Index total = full.length();
  const Index n_train = static_cast<Index>(std::llround(cfg.train_fraction * static_cast<double>(total)));
  const Index n_val = static_cast<Index>(std::llround(cfg.val_fraction * static_cast<double>(total)));
  const Index n_test = total - n_train - n_val;
  if (n_train < 2 || n_val < 2 || n_test < 2) throw ConfigError("benchmark series too short to split");

  b.train = data::slice(full, 0, n_train);
  b.val = data::slice(full, n_train, n_val);
  b.test_clean = data::slice(full, n_train + n_val, n_test);
  b.variants = inject_test_variants(b.test_clean, cfg.anomalies);
  return b;
}

}  // namespace carots::synth
