#include "carots/nnet/optimizer.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace carots::nnet {

double scheduled_learning_rate(const AdamConfig& cfg, double epoch) {
  const double base = cfg.learning_rate;
  const double total = cfg.total_epochs;
  const double warmup = std::min(cfg.warmup_epochs, total);
  if (epoch <= 0.0) return 0.0;
  if (epoch >= total) return 0.0;
  if (epoch < warmup) return base * epoch / warmup;
  const double span = total - warmup;
  if (span <= 0.0) return base;
  const double progress = (epoch - warmup) / span;
  return std::max(0.0, base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

double clip_grad_norm(ParamSet& params, double max_norm) {
  const double norm = params.grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& [name, p] : params) p.grad *= scale;
  }
  return norm;
}

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
  if (cfg_.learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (cfg_.weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
  if (cfg_.clip_norm <= 0.0) throw ConfigError("clip norm must be > 0");
  if (cfg_.total_epochs <= 0.0) throw ConfigError("total epochs must be > 0");
}

StepInfo Adam::step(ParamSet& params, double epoch) {
  for (const auto& [name, p] : params) {
    if (!p.grad.allFinite()) throw NumericalError("non-finite gradient in parameter '" + name + "'");
  }
  StepInfo info;
  info.grad_norm = clip_grad_norm(params, cfg_.clip_norm);
  info.learning_rate = scheduled_learning_rate(cfg_, epoch);

  ++step_;
  const double lr = info.learning_rate;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (auto& [name, p] : params) {
    Moments& mom = moments_[name];
    if (mom.m.size() == 0) {
      mom.m = Matrix::Zero(p.value.rows(), p.value.cols());
      mom.v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    mom.m = cfg_.beta1 * mom.m + (1.0 - cfg_.beta1) * p.grad;
    mom.v = cfg_.beta2 * mom.v + (1.0 - cfg_.beta2) * p.grad.cwiseAbs2();
    if (cfg_.weight_decay > 0.0) p.value *= (1.0 - lr * cfg_.weight_decay);
    p.value.array() -= lr * (mom.m.array() / bc1) / ((mom.v.array() / bc2).sqrt() + cfg_.epsilon);
  }
  return info;
}

}  // namespace carots::nnet
