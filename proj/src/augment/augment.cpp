#include "carots/augment/augment.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace carots::augment {

void CpaConfig::validate(Index variables) const {
  if (causes < 1) throw ConfigError("CPA needs at least one causing variable");
  if (variables > 1 && causes >= variables) {
    throw ConfigError("CPA causing-variable count must be below the number of variables");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("CPA noise std must be non-negative");
}

void CdaConfig::validate() const {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw ConfigError("CDA cutoff must lie in [0, 1]");
  if (palette.empty()) throw ConfigError("CDA bias palette is empty");
  for (double b : palette) {
    if (b == 0.0 || !std::isfinite(b)) throw ConfigError("CDA bias palette must hold finite non-zero values");
  }
  if (!(timestep_fraction > 0.0 && timestep_fraction <= 1.0)) {
    throw ConfigError("CDA timestep fraction must lie in (0, 1]");
  }
}

namespace {

void check_window(const Matrix& window, Index variables, Index width) {
  if (window.rows() != width || window.cols() != variables) {
    throw ShapeError("window is " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) +
                     ", expected " + std::to_string(width) + "x" + std::to_string(variables));
  }
}

std::vector<Index> pick_distinct(Index n, Index k, Rng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

// Draws causes and noise, applies the noise, and returns the effect set.
CpaTrace perturb_causes(Matrix& window, const CausalityMatrix& matrix, const CpaConfig& cfg, Rng& rng) {
  const Index n = window.cols();
  const Index last_history = window.rows() - 2;
  CpaTrace t;
  t.causes = pick_distinct(n, std::min(cfg.causes, n), rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<bool> effect(static_cast<std::size_t>(n), false);
  for (Index c : t.causes) {
    const double z = cfg.noise_std * noise(rng);
    t.noise.push_back(z);
    window(last_history, c) += z;
    for (Index child : matrix.children(c)) effect[static_cast<std::size_t>(child)] = true;
  }
  for (Index j = 0; j < n; ++j)
    if (effect[static_cast<std::size_t>(j)]) t.effects.push_back(j);
  return t;
}

}  // namespace

std::vector<Matrix> cpa_batch(const std::vector<Matrix>& windows, const CausalModel& model,
                              const CpaConfig& cfg, Rng& rng, std::vector<CpaTrace>* traces) {
  const Index n = model.variables();
  const Index w = model.window();
  cfg.validate(n);
  const CausalityMatrix matrix = model.matrix();
  std::vector<Matrix> out;
  out.reserve(windows.size());
  std::vector<CpaTrace> local;
  local.reserve(windows.size());
  for (const Matrix& win : windows) {
    check_window(win, n, w);
    out.push_back(win);
    local.push_back(perturb_causes(out.back(), matrix, cfg, rng));
  }
  if (out.empty()) return out;

  Matrix inputs;
  Matrix targets;
  causal::split_windows(out, inputs, targets);
  const Matrix pred = model.forecast_flat(inputs);
  for (std::size_t b = 0; b < out.size(); ++b) {
    for (Index e : local[b].effects) out[b](w - 1, e) = pred(static_cast<Index>(b), e);
  }
  if (traces != nullptr) *traces = std::move(local);
  return out;
}

Matrix cpa(const Matrix& window, const CausalModel& model, const CpaConfig& cfg, Rng& rng,
           CpaTrace* trace) {
  std::vector<CpaTrace> traces;
  std::vector<Matrix> out = cpa_batch({window}, model, cfg, rng, &traces);
  if (trace != nullptr) *trace = std::move(traces.front());
  return std::move(out.front());
}

std::vector<Index> reachable(const CausalityMatrix& matrix, Index seed) {
  const Index n = matrix.variables();
  if (seed < 0 || seed >= n) throw ConfigError("seed variable out of range");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{seed};
  std::vector<Index> out;
  seen[static_cast<std::size_t>(seed)] = true;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (Index c : matrix.children(v)) {
      if (!seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = true;
        stack.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void dfs(const CausalityMatrix& matrix, Index v, double cutoff, Rng& rng, std::vector<bool>& seen,
         std::vector<Index>& order) {
  seen[static_cast<std::size_t>(v)] = true;
  order.push_back(v);
  std::vector<Index> next = matrix.children(v);
  std::shuffle(next.begin(), next.end(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index c : next) {
    if (seen[static_cast<std::size_t>(c)]) continue;
    if (unit(rng) < cutoff) continue;
    dfs(matrix, c, cutoff, rng, seen, order);
  }
}

}  // namespace

Matrix cda(const Matrix& window, const CausalityMatrix& matrix, const CdaConfig& cfg, Rng& rng,
           CdaTrace* trace) {
  cfg.validate();
  const Index n = matrix.variables();
  const Index w = window.rows();
  check_window(window, n, w);
  if (w < 1) throw ShapeError("empty window");

  CdaTrace t;
  t.seed_variable = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  dfs(matrix, t.seed_variable, cfg.cutoff, rng, seen, t.subgraph);

  const Index steps = std::max<Index>(1, static_cast<Index>(std::llround(cfg.timestep_fraction * static_cast<double>(w))));
  std::uniform_int_distribution<std::size_t> pick(0, cfg.palette.size() - 1);
  Matrix out = window;
  for (Index v : t.subgraph) {
    const double bias = cfg.palette[pick(rng)];
    std::vector<Index> rows = pick_distinct(w, steps, rng);
    for (Index r : rows) out(r, v) += bias;
    t.biases.push_back(bias);
    t.timesteps.push_back(std::move(rows));
  }
  if (trace != nullptr) *trace = std::move(t);
  return out;
}

Group AugmentedBatch::group(Index k) const {
  if (k < 0 || k >= size()) throw ConfigError("batch index out of range");
  return static_cast<Group>(k / group_size);
}

Index AugmentedBatch::counterpart(Index j) const {
  if (j < 0 || j >= 2 * group_size) throw ConfigError("counterpart is defined for positive samples only");
  return j + 2 * group_size;
}

AugmentedBatch build_batch(const std::vector<Matrix>& originals, const CausalModel& model,
                           const CausalityMatrix& matrix, const CpaConfig& cpa_cfg,
                           const CdaConfig& cda_cfg, Rng& rng, BatchTraces* traces) {
  if (originals.empty()) throw ConfigError("cannot build an augmented batch from zero windows");
  const Index b = static_cast<Index>(originals.size());
  BatchTraces local;
  std::vector<Matrix> preserved = cpa_batch(originals, model, cpa_cfg, rng, &local.cpa);

  AugmentedBatch batch;
  batch.group_size = b;
  batch.samples.reserve(static_cast<std::size_t>(4 * b));
  batch.samples.insert(batch.samples.end(), originals.begin(), originals.end());
  batch.samples.insert(batch.samples.end(), preserved.begin(), preserved.end());
  for (Index k = 0; k < 2 * b; ++k) {
    CdaTrace t;
    batch.samples.push_back(cda(batch.samples[static_cast<std::size_t>(k)], matrix, cda_cfg, rng, &t));
    local.cda.push_back(std::move(t));
  }
  if (traces != nullptr) *traces = std::move(local);
  return batch;
}

nlohmann::json to_json(const CpaTrace& t) {
  return {{"causes", t.causes}, {"noise", t.noise}, {"effects", t.effects}};
}

nlohmann::json to_json(const CdaTrace& t) {
  return {{"seed_variable", t.seed_variable},
          {"subgraph", t.subgraph},
          {"biases", t.biases},
          {"timesteps", t.timesteps}};
}

}  // namespace carots::augment
