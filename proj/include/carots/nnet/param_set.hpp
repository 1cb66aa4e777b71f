#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <random>
#include <string>

namespace carots::nnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// A trainable tensor and its gradient buffer (always the same shape).
struct Parameter {
  Matrix value;
  Matrix grad;
};

/// Named parameters, iterated in lexicographic name order so that every
/// traversal (optimizer, checkpoint, gradient norm) is deterministic.
class ParamSet {
 public:
  using Map = std::map<std::string, Parameter>;

  Parameter& add(const std::string& name, Matrix init);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  void zero_grad();
  /// L2 norm of all gradients concatenated.
  double grad_norm() const;
  Index element_count() const;
  std::size_t size() const { return params_.size(); }

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

 private:
  Map params_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
Matrix uniform_init(Index rows, Index cols, Index fan_in, Rng& rng);

}  // namespace carots::nnet
