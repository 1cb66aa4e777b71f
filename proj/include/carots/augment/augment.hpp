#pragma once

#include "carots/causal/causal_model.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace carots::augment {

using causal::CausalityMatrix;
using causal::CausalModel;
using nnet::Index;
using nnet::Matrix;
using nnet::Rng;

struct CpaConfig {
  /// Number of causing variables perturbed per window.
  Index causes = 1;
  double noise_std = 0.2;
  std::uint64_t seed = 0;

  void validate(Index variables) const;
};

struct CdaConfig {
  /// Probability that a DFS expansion step halts its branch.
  double cutoff = 0.1;
  std::vector<double> palette = {-0.5, -0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5};
  /// Fraction of the window's timesteps biased per selected variable.
  double timestep_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CpaTrace {
  std::vector<Index> causes;
  std::vector<double> noise;  ///< aligned with `causes`
  std::vector<Index> effects;
};

struct CdaTrace {
  Index seed_variable = 0;
  std::vector<Index> subgraph;  ///< DFS visit order, seed first
  std::vector<double> biases;   ///< aligned with `subgraph`
  std::vector<std::vector<Index>> timesteps;
};

/// Causality-preserving augmentation: noise on the last history row of the
/// causing variables, then the children of those variables at the final row
/// are replaced by the model's forecast from the perturbed history.
Matrix cpa(const Matrix& window, const CausalModel& model, const CpaConfig& cfg, Rng& rng,
           CpaTrace* trace = nullptr);

/// Batched form of cpa(); forecasts all windows in one call. Consumes the RNG
/// in the same order as calling cpa() window by window.
std::vector<Matrix> cpa_batch(const std::vector<Matrix>& windows, const CausalModel& model,
                              const CpaConfig& cfg, Rng& rng, std::vector<CpaTrace>* traces = nullptr);

/// Causality-disturbing augmentation: DFS from a random seed variable over the
/// binary graph (each expansion halts with probability `cutoff`), then one
/// palette bias per visited variable added to a random subset of timesteps.
Matrix cda(const Matrix& window, const CausalityMatrix& matrix, const CdaConfig& cfg, Rng& rng,
           CdaTrace* trace = nullptr);

/// Variables reachable from `seed` (including itself) along binary edges.
std::vector<Index> reachable(const CausalityMatrix& matrix, Index seed);

enum class Group { original = 0, preserved = 1, disturbed_original = 2, disturbed_preserved = 3 };

/// Samples in group order [G1 | G2 | G3 | G4], each of size B.
/// G1 originals, G2 = CPA(G1), G3 = CDA(G1), G4 = CDA(G2).
struct AugmentedBatch {
  std::vector<Matrix> samples;
  Index group_size = 0;

  Index size() const { return static_cast<Index>(samples.size()); }
  Group group(Index k) const;
  /// For a positive index j < 2B, the index of its disturbed version (j + 2B).
  Index counterpart(Index j) const;
};

struct BatchTraces {
  std::vector<CpaTrace> cpa;
  std::vector<CdaTrace> cda;  ///< G3 then G4
};

AugmentedBatch build_batch(const std::vector<Matrix>& originals, const CausalModel& model,
                           const CausalityMatrix& matrix, const CpaConfig& cpa_cfg,
                           const CdaConfig& cda_cfg, Rng& rng, BatchTraces* traces = nullptr);

nlohmann::json to_json(const CpaTrace& t);
nlohmann::json to_json(const CdaTrace& t);

}  // namespace carots::augment
