#include "carots/contrastive/soc.hpp"

#include "carots/error.hpp"
#include "carots/nnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace carots::contrastive {

void SocConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(alpha_start <= alpha_end && alpha_end <= 1.0)) {
    throw ConfigError("similarity thresholds must satisfy alpha_start <= alpha_end <= 1");
  }
  if (epochs < 1) throw ConfigError("contrastive epochs must be positive");
  if (fixed_alpha && !(*fixed_alpha <= 1.0)) throw ConfigError("fixed alpha must be at most 1");
}

double alpha_at(const SocConfig& cfg, Index epoch) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(cfg.epochs) + ")");
  }
  if (cfg.fixed_alpha) return *cfg.fixed_alpha;
  if (cfg.epochs == 1) return cfg.alpha_start;
  const double f = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return cfg.alpha_start + f * (cfg.alpha_end - cfg.alpha_start);
}

SocEvaluation evaluate_soc(const Matrix& scaled, double alpha, double tau, bool include_self,
                           bool with_grad) {
  const Index n = scaled.rows();
  if (scaled.cols() != n || n % 4 != 0 || n == 0) {
    throw ShapeError("SOC loss needs a square similarity matrix over 4B samples");
  }
  const Index half = n / 2;
  const double cut = alpha / tau;

  SocEvaluation out;
  out.positives.resize(static_cast<std::size_t>(half));
  if (with_grad) out.grad = Matrix::Zero(n, n);
  Index kept = 0;
  std::vector<double> neg_terms;
  for (Index i = 0; i < half; ++i) {
    auto& pos = out.positives[static_cast<std::size_t>(i)];
    for (Index j = 0; j < half; ++j) {
      if (j == i ? include_self : scaled(i, j) >= cut) pos.push_back(j);
    }
    kept += static_cast<Index>(pos.size());
    if (pos.empty()) continue;

    // Shared negative set for this anchor; shift by the row max for stability.
    double m = -std::numeric_limits<double>::infinity();
    for (Index j : pos) m = std::max({m, scaled(i, j), scaled(i, j + half)});
    double neg = 0.0;
    for (Index j : pos) neg += std::exp(scaled(i, j + half) - m);

    const double weight = 1.0 / (static_cast<double>(half) * static_cast<double>(pos.size()));
    double inv_denoms = 0.0;
    for (Index j : pos) {
      const double e = std::exp(scaled(i, j) - m);
      const double denom = e + neg;
      out.loss += weight * (std::log(denom) - (scaled(i, j) - m));
      if (with_grad) {
        out.grad(i, j) -= weight * (neg / denom);
        inv_denoms += 1.0 / denom;
      }
    }
    // Every negative appears in each term's denominator.
    if (with_grad) {
      for (Index k : pos) out.grad(i, k + half) += weight * std::exp(scaled(i, k + half) - m) * inv_denoms;
    }
  }
  out.unfiltered_ratio = static_cast<double>(kept) / (static_cast<double>(half) * static_cast<double>(half));
  return out;
}

Matrix scaled_similarity(const Matrix& embeddings, double tau) {
  Matrix unit = embeddings;
  for (Index r = 0; r < unit.rows(); ++r) {
    const double norm = unit.row(r).norm();
    if (!(norm > 0.0)) throw NumericalError("zero-norm embedding in similarity");
    unit.row(r) /= norm;
  }
  return (unit * unit.transpose()) / tau;
}

nnet::Var soc_loss(nnet::Var embeddings, double alpha, double tau, bool include_self) {
  nnet::Var s = nnet::affine(nnet::cosine_similarity(embeddings, embeddings), 1.0 / tau);
  nnet::Tape& tape = *s.tape();
  SocEvaluation ev = evaluate_soc(s.value(), alpha, tau, include_self, tape.needs_grad(s));
  Matrix grad = std::move(ev.grad);
  return tape.record(
      Matrix::Constant(1, 1, ev.loss), {s},
      [s, grad = std::move(grad)](nnet::Tape& t, const Matrix& upstream, const Matrix&) {
        t.accumulate(s, upstream(0, 0) * grad);
      },
      "soc_loss");
}

double unfiltered_ratio(const Matrix& embeddings, double alpha, double tau, bool include_self) {
  return evaluate_soc(scaled_similarity(embeddings, tau), alpha, tau, include_self).unfiltered_ratio;
}

}  // namespace carots::contrastive
