#include "carots/nnet/tape.hpp"

#include "carots/error.hpp"

namespace carots::nnet {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ShapeError("use of an unbound Var");
  return tape_->value(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("scalar() on a " + std::to_string(v.rows()) + "x" +
                     std::to_string(v.cols()) + " node");
  }
  return v(0, 0);
}

std::size_t Tape::check(const Var& v) const {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw ShapeError("Var does not belong to this tape");
  }
  return static_cast<std::size_t>(v.id_);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Parameter& param) {
  Node n;
  n.value = param.value;
  n.param = &param;
  n.needs_grad = true;
  n.op = "parameter";
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward backward,
                 const char* op) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (const Var& in : inputs) {
    if (nodes_[check(in)].needs_grad) n.needs_grad = true;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::backward(const Var& loss) {
  const std::size_t root = check(loss);
  const Matrix& v = nodes_[root].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + std::to_string(v.rows()) + "x" +
                     std::to_string(v.cols()));
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root].needs_grad) return;
  nodes_[root].grad = Matrix::Ones(1, 1);

  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      // The closure only touches earlier nodes, so `n.grad` stays put.
      n.backward(*this, n.grad, n.value);
    }
  }
}

Var Binding::operator[](const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  Var v = mutable_ != nullptr ? tape_.parameter(mutable_->at(name))
                              : tape_.constant(params_->at(name).value);
  cache_.emplace(name, v);
  return v;
}

}  // namespace carots::nnet
