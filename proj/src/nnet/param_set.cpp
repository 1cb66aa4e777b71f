#include "carots/nnet/param_set.hpp"

#include "carots/error.hpp"

#include <cmath>

namespace carots::nnet {

Parameter& ParamSet::add(const std::string& name, Matrix init) {
  if (params_.count(name) != 0) {
    throw ConfigError("duplicate parameter name: " + name);
  }
  Parameter p;
  p.grad = Matrix::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParamSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

void ParamSet::zero_grad() {
  for (auto& [name, p] : params_) {
    p.grad.setZero(p.value.rows(), p.value.cols());
  }
}

double ParamSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& [name, p] : params_) sq += p.grad.squaredNorm();
  return std::sqrt(sq);
}

Index ParamSet::element_count() const {
  Index n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

Matrix uniform_init(Index rows, Index cols, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  // Fill row-major so the draw order does not depend on Eigen's storage order.
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace carots::nnet
