#pragma once

#include "carots/nnet/param_set.hpp"

#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace carots::nnet {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode differentiation record. Nodes are appended in evaluation order,
/// so the recording order is already a topological order; backward() walks it
/// in reverse, visiting every node at most once.
class Tape {
 public:
  /// Propagates the node's upstream gradient into its inputs via accumulate().
  /// `output` is the node's own forward value.
  using Backward =
      std::function<void(Tape& tape, const Matrix& upstream, const Matrix& output)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a parameter; backward() adds into `param.grad`.
  Var parameter(Parameter& param);

  /// Records an operation. `backward` is dropped when no input needs a gradient.
  Var record(Matrix value, const std::vector<Var>& inputs, Backward backward, const char* op);

  const Matrix& value(const Var& v) const { return nodes_[check(v)].value; }
  bool needs_grad(const Var& v) const { return nodes_[check(v)].needs_grad; }

  /// grad(v) += delta. No-op for nodes that do not need gradients.
  template <typename Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& delta) {
    Node& n = nodes_[check(v)];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
    } else {
      n.grad += delta;
    }
  }

  /// Seeds d(loss)/d(loss) = 1 and accumulates parameter gradients.
  /// Throws ShapeError unless `loss` is 1x1.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  const char* op_name(const Var& v) const { return nodes_[check(v)].op; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
    const char* op = "";
  };

  std::size_t check(const Var& v) const;

  // deque: references to node values stay valid while new nodes are appended.
  std::deque<Node> nodes_;
};

/// Binds a ParamSet to a tape, creating one leaf per parameter on first use.
/// The const overload records constants, so no gradient is tracked.
class Binding {
 public:
  Binding(Tape& tape, ParamSet& params) : tape_(tape), mutable_(&params), params_(&params) {}
  Binding(Tape& tape, const ParamSet& params) : tape_(tape), params_(&params) {}

  Var operator[](const std::string& name);
  Tape& tape() { return tape_; }

 private:
  Tape& tape_;
  ParamSet* mutable_ = nullptr;
  const ParamSet* params_;
  std::map<std::string, Var> cache_;
};

}  // namespace carots::nnet
