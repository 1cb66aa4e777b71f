#pragma once

#include "carots/nnet/tape.hpp"

#include <optional>
#include <vector>

namespace carots::contrastive {

using nnet::Index;
using nnet::Matrix;

struct SocConfig {
  double temperature = 0.1;
  double alpha_start = 0.5;
  double alpha_end = 0.9;
  Index epochs = 30;
  /// Keep the anchor itself among its positives.
  bool include_self = true;
  /// Overrides the schedule with a constant threshold (e.g. -1 disables filtering).
  std::optional<double> fixed_alpha;

  void validate() const;
};

/// Linear from alpha_start at epoch 0 to alpha_end at the last epoch.
double alpha_at(const SocConfig& cfg, Index epoch);

/// Loss over a batch laid out as [positives (2B) | disturbed counterparts (2B)].
/// For anchor i < 2B with scaled similarities S = cos / tau:
///   P_i = { j < 2B : S_ij >= alpha / tau },  N_i = { j + 2B : j in P_i }
///   loss = 1/(2B) sum_i 1/|P_i| sum_{j in P_i}
///          -log( e^{S_ij} / (e^{S_ij} + sum_{k in N_i} e^{S_ik}) )
/// Anchors with an empty P_i (possible only with include_self off) add 0.
struct SocEvaluation {
  double loss = 0.0;
  std::vector<std::vector<Index>> positives;
  double unfiltered_ratio = 0.0;
  /// d loss / d S (4B x 4B); filled only when requested.
  Matrix grad;
};

/// Evaluates the loss on a precomputed scaled-similarity matrix.
SocEvaluation evaluate_soc(const Matrix& scaled, double alpha, double tau, bool include_self,
                           bool with_grad = false);

/// Differentiable loss from raw embeddings (4B x D). Filter sets are fixed by
/// the forward pass; gradients flow through the similarities only.
nnet::Var soc_loss(nnet::Var embeddings, double alpha, double tau, bool include_self = true);

/// Scaled similarity matrix cos(e_i, e_j) / tau.
Matrix scaled_similarity(const Matrix& embeddings, double tau);

/// sum_i |P_i| / (2B)^2.
double unfiltered_ratio(const Matrix& embeddings, double alpha, double tau, bool include_self = true);

}  // namespace carots::contrastive
