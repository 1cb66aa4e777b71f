#pragma once

#include "carots/dataio/series.hpp"
#include "carots/nnet/optimizer.hpp"
#include "carots/nnet/tape.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace carots::causal {

using nnet::Index;
using nnet::Matrix;
using nnet::Vector;

/// Learned causal structure. Entry (i, j) describes the edge i -> j,
/// i.e. whether variable i is a parent of variable j.
class CausalityMatrix {
 public:
  CausalityMatrix() = default;
  CausalityMatrix(Matrix raw, double threshold = 0.5);

  /// Builds a matrix whose gates equal `gates` (entries clamped into (0, 1)).
  static CausalityMatrix from_gates(const Matrix& gates, double threshold = 0.5);

  Index variables() const { return raw_.rows(); }
  double threshold() const { return threshold_; }
  const Matrix& raw() const { return raw_; }
  const Matrix& gates() const { return gates_; }
  /// 1 where gate >= threshold, else 0.
  const Matrix& binary() const { return binary_; }

  std::vector<Index> parents(Index j) const;
  std::vector<Index> children(Index i) const;

 private:
  Matrix raw_;
  Matrix gates_;
  Matrix binary_;
  double threshold_ = 0.5;
};

CausalityMatrix binarize(const Matrix& raw, double threshold = 0.5);

struct CausalConfig {
  Index window = 10;
  Index hidden = 32;
  double lambda_sparse = 0.001;
  /// Ridge weight on the first-layer forecaster weights; pins the gate scale.
  double weight_ridge = 3e-4;
  double gate_threshold = 0.5;
  /// Initial value of every gate logit (sigmoid(1) ~ 0.73).
  double gate_init = 1.0;
  Index epochs = 60;
  Index batch_size = 16;
  nnet::AdamConfig adam{1e-3};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-target forecaster over gated history:
///   input_i = flatten(X_<t) * tile(g(:, i)),  g = sigmoid(gate_logits)
///   x_hat_i = tanh(input_i W1_i + b1_i) W2_i + b2_i
/// History is flattened lag-major: column l * N + j holds variable j at lag row l.
class CausalModel {
 public:
  CausalModel() = default;
  CausalModel(Index variables, const CausalConfig& cfg, nnet::Rng& rng);
  /// Wraps existing parameters; names and shapes are checked.
  CausalModel(nnet::ParamSet params, Index window, double lambda_sparse, double gate_threshold,
              double weight_ridge = 0.0);

  Index variables() const { return variables_; }
  Index window() const { return window_; }
  Index hidden() const { return hidden_; }
  double lambda_sparse() const { return lambda_sparse_; }
  double gate_threshold() const { return gate_threshold_; }
  double weight_ridge() const { return weight_ridge_; }

  const nnet::ParamSet& params() const { return params_; }
  nnet::ParamSet& params() { return params_; }

  Matrix gates() const;
  CausalityMatrix matrix() const;

  /// One-step forecast from a (w - 1) x N history.
  Vector forecast(const Matrix& history) const;
  /// Forecasts for B flattened histories (B x (w - 1) N) -> B x N.
  Matrix forecast_flat(const Matrix& inputs) const;
  /// Forecast of the last row of each window from its preceding rows.
  Matrix forecast_windows(const std::vector<Matrix>& windows) const;

  /// Differentiable objective on a tape:
  ///   MSE + lambda * sum |g| + ridge * sum_i ||W1_i||^2.
  nnet::Var objective(nnet::Binding& bound, const Matrix& inputs, const Matrix& targets) const;
  /// Value of the same objective without a tape.
  double objective_value(const Matrix& inputs, const Matrix& targets) const;

  static std::string hidden_weight(Index i) { return "f" + std::to_string(i) + ".w1"; }
  static std::string hidden_bias(Index i) { return "f" + std::to_string(i) + ".b1"; }
  static std::string output_weight(Index i) { return "f" + std::to_string(i) + ".w2"; }
  static std::string output_bias(Index i) { return "f" + std::to_string(i) + ".b2"; }
  static constexpr const char* kGateLogits = "gate_logits";

 private:
  void check_shapes() const;

  nnet::ParamSet params_;
  Index variables_ = 0;
  Index window_ = 0;
  Index hidden_ = 0;
  double lambda_sparse_ = 0.01;
  double gate_threshold_ = 0.5;
  double weight_ridge_ = 0.0;
};

/// Splits windows into flattened histories (B x (w - 1) N) and targets (B x N).
void split_windows(const std::vector<Matrix>& windows, Matrix& inputs, Matrix& targets);

struct CausalEpochLog {
  Index epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct CausalTrainResult {
  CausalModel model;
  std::vector<CausalEpochLog> log;
  Index best_epoch = 0;
};

/// Minimizes the objective with Adam over shuffled mini-batches and returns the
/// parameters from the epoch with the lowest validation objective. Without
/// validation windows the training objective is used for selection.
/// Throws NumericalError (with epoch and step) if the loss becomes non-finite.
CausalTrainResult train_causal_discoverer(const data::WindowSet& train, const CausalConfig& cfg,
                                          const data::WindowSet* val = nullptr);

void save_causal_model(const std::filesystem::path& path, const CausalModel& model);
CausalModel load_causal_model(const std::filesystem::path& path);

/// Raw logits, gates, binary matrix and parent/child lists.
nlohmann::json causality_report(const CausalModel& model, const std::vector<std::string>& names);

}  // namespace carots::causal
