#pragma once

#include "carots/nnet/param_set.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace carots::nnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  /// Decoupled (AdamW-style) weight decay.
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip threshold.
  double clip_norm = 1.0;
  double warmup_epochs = 5.0;
  double total_epochs = 30.0;
};

/// Linear warmup from 0 to the base rate over `warmup_epochs`, then cosine
/// decay to 0 at `total_epochs`. `epoch` is fractional (epoch + batch / batches).
double scheduled_learning_rate(const AdamConfig& cfg, double epoch);

/// Rescales all gradients so their global norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(ParamSet& params, double max_norm);

struct StepInfo {
  double learning_rate = 0.0;
  double grad_norm = 0.0;  ///< before clipping
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg);

  /// Checks gradients for NaN/Inf (NumericalError naming the parameter),
  /// clips, then applies one update at the scheduled rate.
  StepInfo step(ParamSet& params, double epoch);

  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  AdamConfig cfg_;
  std::map<std::string, Moments> moments_;
  std::int64_t step_ = 0;
};

}  // namespace carots::nnet
