#include "carots/synthgen/anomaly.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace carots::synth {

namespace {

bool is_collective(AnomalyKind k) {
  return k == AnomalyKind::collective_trend || k == AnomalyKind::collective_global;
}

void require_kind(const AnomalySpec& spec, AnomalyKind kind) {
  if (spec.kind != kind) {
    throw ConfigError("injector for " + to_string(kind) + " called with a " + to_string(spec.kind) +
                      " spec");
  }
}

struct Plan {
  std::vector<Index> events;
  std::vector<Index> variables;
  std::mt19937_64 rng;
};

// Picks affected variables, then event centers uniformly without replacement,
// keeping collective events at least 2r+1 apart so their intervals never overlap.
Plan make_plan(const LabeledSeries& s, const AnomalySpec& spec) {
  s.validate();
  spec.validate(s.length(), s.variables());
  Plan plan{{}, {}, std::mt19937_64(spec.seed)};

  if (spec.affected_variables) {
    plan.variables = *spec.affected_variables;
  } else {
    std::vector<Index> all(static_cast<std::size_t>(s.variables()));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), plan.rng);
    all.resize(static_cast<std::size_t>(std::min(spec.affected_count, s.variables())));
    plan.variables = std::move(all);
  }
  std::sort(plan.variables.begin(), plan.variables.end());

  if (!spec.event_times.empty()) {
    plan.events = spec.event_times;
  } else {
    const Index count = event_count(spec, s.length());
    const Index gap = is_collective(spec.kind) ? 2 * spec.radius + 1 : 1;
    std::vector<Index> candidates(static_cast<std::size_t>(s.length()));
    std::iota(candidates.begin(), candidates.end(), 0);
    std::shuffle(candidates.begin(), candidates.end(), plan.rng);
    std::vector<Index> taken;
    for (Index c : candidates) {
      if (static_cast<Index>(taken.size()) == count) break;
      bool ok = true;
      for (Index t : taken) {
        if (std::abs(t - c) < gap) {
          ok = false;
          break;
        }
      }
      if (ok) taken.push_back(c);
    }
    if (static_cast<Index>(taken.size()) < count) {
      throw ConfigError("cannot place " + std::to_string(count) + " non-overlapping " +
                        to_string(spec.kind) + " events in " + std::to_string(s.length()) + " steps");
    }
    plan.events = std::move(taken);
  }
  std::sort(plan.events.begin(), plan.events.end());
  return plan;
}

InjectionResult start(const LabeledSeries& s, const Plan& plan) {
  InjectionResult r;
  r.series = s;
  r.event_times = plan.events;
  r.variables = plan.variables;
  r.labels_before = s.labels;
  return r;
}

void set_value(InjectionResult& r, Index t, Index var, double value) {
  double& cell = r.series.values(t, var);
  r.edits.push_back({t, var, cell, value});
  cell = value;
  r.series.labels[static_cast<std::size_t>(t)] = 1;
}

void mean_std(const data::Matrix& values, Index var, Index begin, Index end, double& mu,
              double& sigma) {
  const auto col = values.col(var).segment(begin, end - begin);
  mu = col.mean();
  sigma = std::sqrt((col.array() - mu).square().mean());
}

}  // namespace

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::point_global: return "PG";
    case AnomalyKind::point_contextual: return "PC";
    case AnomalyKind::collective_trend: return "CT";
    case AnomalyKind::collective_global: return "CG";
  }
  return "?";
}

AnomalyKind parse_anomaly_kind(const std::string& s) {
  for (AnomalyKind k : all_anomaly_kinds()) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown anomaly kind '" + s + "' (expected PG, PC, CT or CG)");
}

const std::vector<AnomalyKind>& all_anomaly_kinds() {
  static const std::vector<AnomalyKind> kinds = {
      AnomalyKind::point_global, AnomalyKind::point_contextual, AnomalyKind::collective_trend,
      AnomalyKind::collective_global};
  return kinds;
}

void AnomalySpec::validate(Index length, Index variables) const {
  if (split != Split::test) {
    throw ConfigError("anomalies may only be injected into the test split");
  }
  if (!(anomaly_ratio > 0.0 && anomaly_ratio < 1.0)) {
    throw ConfigError("anomaly_ratio must lie in (0, 1)");
  }
  if (radius < 1) throw ConfigError("anomaly radius must be >= 1");
  if (affected_variables) {
    if (affected_variables->empty()) throw ConfigError("affected_variables is empty");
    for (Index v : *affected_variables) {
      if (v < 0 || v >= variables) {
        throw ConfigError("affected variable " + std::to_string(v) + " out of range");
      }
    }
  } else if (affected_count < 1) {
    throw ConfigError("affected variable count must be >= 1");
  }
  for (Index t : event_times) {
    if (t < 0 || t >= length) throw ConfigError("event time out of range");
  }
  if (kind == AnomalyKind::collective_global && cg_harmonics < 1) {
    throw ConfigError("CG needs at least one harmonic");
  }
}

Index event_count(const AnomalySpec& spec, Index length) {
  const double labeled = spec.anomaly_ratio * static_cast<double>(length);
  const double per_event = is_collective(spec.kind) ? static_cast<double>(2 * spec.radius + 1) : 1.0;
  return std::max<Index>(1, static_cast<Index>(std::llround(labeled / per_event)));
}

double square_wave_offset(double amplitude, double frequency, Index harmonics, Index t) {
  double acc = 0.0;
  for (Index k = 0; k < harmonics; ++k) {
    const double odd = static_cast<double>(2 * k + 1);
    acc += amplitude / odd * std::sin(2.0 * std::numbers::pi * frequency * odd * static_cast<double>(t));
  }
  return acc;
}

InjectionResult inject_point_global(const LabeledSeries& s, const AnomalySpec& spec) {
  require_kind(spec, AnomalyKind::point_global);
  Plan plan = make_plan(s, spec);
  InjectionResult r = start(s, plan);
  for (Index var : plan.variables) {
    double mu = 0.0;
    double sigma = 0.0;
    mean_std(s.values, var, 0, s.length(), mu, sigma);
    for (Index t : plan.events) set_value(r, t, var, mu + spec.factor * sigma);
  }
  return r;
}

InjectionResult inject_point_contextual(const LabeledSeries& s, const AnomalySpec& spec) {
  require_kind(spec, AnomalyKind::point_contextual);
  Plan plan = make_plan(s, spec);
  InjectionResult r = start(s, plan);
  for (Index var : plan.variables) {
    for (Index t : plan.events) {
      const Index lo = std::max<Index>(0, t - spec.radius);
      const Index hi = std::min<Index>(s.length(), t + spec.radius + 1);
      double mu = 0.0;
      double sigma = 0.0;
      // Statistics come from the clean input, never from earlier injections.
      mean_std(s.values, var, lo, hi, mu, sigma);
      set_value(r, t, var, mu + spec.factor * sigma);
    }
  }
  return r;
}

InjectionResult inject_collective_trend(const LabeledSeries& s, const AnomalySpec& spec) {
  require_kind(spec, AnomalyKind::collective_trend);
  Plan plan = make_plan(s, spec);
  InjectionResult r = start(s, plan);
  std::bernoulli_distribution coin(0.5);
  for (Index t_a : plan.events) {
    for (Index var : plan.variables) {
      const double sign = coin(plan.rng) ? 1.0 : -1.0;
      const Index start_t = t_a - spec.radius;
      const Index lo = std::max<Index>(0, start_t);
      const Index hi = std::min<Index>(s.length() - 1, t_a + spec.radius);
      for (Index t = lo; t <= hi; ++t) {
        const double offset = sign * spec.factor * static_cast<double>(t - start_t);
        set_value(r, t, var, r.series.values(t, var) + offset);
      }
    }
  }
  return r;
}

InjectionResult inject_collective_global(const LabeledSeries& s, const AnomalySpec& spec) {
  require_kind(spec, AnomalyKind::collective_global);
  Plan plan = make_plan(s, spec);
  InjectionResult r = start(s, plan);
  for (Index t_a : plan.events) {
    const Index lo = std::max<Index>(0, t_a - spec.radius);
    const Index hi = std::min<Index>(s.length() - 1, t_a + spec.radius);
    for (Index var : plan.variables) {
      for (Index t = lo; t <= hi; ++t) {
        const double offset = square_wave_offset(spec.cg_amplitude, spec.cg_frequency, spec.cg_harmonics, t);
        set_value(r, t, var, r.series.values(t, var) + offset);
      }
    }
  }
  return r;
}

InjectionResult inject(const LabeledSeries& s, const AnomalySpec& spec) {
  switch (spec.kind) {
    case AnomalyKind::point_global: return inject_point_global(s, spec);
    case AnomalyKind::point_contextual: return inject_point_contextual(s, spec);
    case AnomalyKind::collective_trend: return inject_collective_trend(s, spec);
    case AnomalyKind::collective_global: return inject_collective_global(s, spec);
  }
  throw ConfigError("unknown anomaly kind");
}

LabeledSeries revert(const InjectionResult& r) {
  LabeledSeries out = r.series;
  for (auto it = r.edits.rbegin(); it != r.edits.rend(); ++it) out.values(it->t, it->variable) = it->before;
  out.labels = r.labels_before;
  return out;
}

}  // namespace carots::synth
