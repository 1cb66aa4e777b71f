#include "carots/nnet/layers.hpp"

#include "carots/error.hpp"

namespace carots::nnet {

void add_linear(ParamSet& params, const std::string& prefix, Index in, Index out, Rng& rng) {
  params.add(prefix + ".w", uniform_init(in, out, in, rng));
  params.add(prefix + ".b", uniform_init(1, out, in, rng));
}

Var linear(Binding& bound, const std::string& prefix, Var x) {
  return add_row(matmul(x, bound[prefix + ".w"]), bound[prefix + ".b"]);
}

void add_gru(ParamSet& params, const std::string& prefix, Index input, Index hidden, Rng& rng) {
  for (const char* gate : {"r", "z", "n"}) {
    const std::string g(gate);
    params.add(prefix + ".w_" + g, uniform_init(input, hidden, hidden, rng));
    params.add(prefix + ".u_" + g, uniform_init(hidden, hidden, hidden, rng));
    params.add(prefix + ".b_" + g, uniform_init(1, hidden, hidden, rng));
  }
}

Var gru_cell(Binding& bound, const std::string& prefix, Var x, Var h) {
  auto pre = [&](const char* gate, Var hidden_in) {
    const std::string g(gate);
    return add_row(add(matmul(x, bound[prefix + ".w_" + g]), matmul(hidden_in, bound[prefix + ".u_" + g])),
                   bound[prefix + ".b_" + g]);
  };
  Var r = sigmoid(pre("r", h));
  Var z = sigmoid(pre("z", h));
  Var n = tanh(pre("n", mul(r, h)));
  return add(mul(affine(z, -1.0, 1.0), n), mul(z, h));
}

Index gru_hidden_size(const ParamSet& params, const std::string& prefix) {
  return params.at(prefix + ".u_r").value.rows();
}

Index gru_input_size(const ParamSet& params, const std::string& prefix) {
  return params.at(prefix + ".w_r").value.rows();
}

Var gru_sequence(Binding& bound, const std::string& prefix, const std::vector<Matrix>& steps) {
  if (steps.empty()) throw ShapeError("gru: window width must be >= 1");
  Tape& tape = bound.tape();
  Var w_r = bound[prefix + ".w_r"];
  const Index input = w_r.rows();
  const Index hidden = w_r.cols();
  const Index batch = steps.front().rows();
  Var h = tape.constant(Matrix::Zero(batch, hidden));
  for (const Matrix& x : steps) {
    if (x.cols() != input) {
      throw ShapeError("gru: input has " + std::to_string(x.cols()) + " columns, expected " +
                       std::to_string(input));
    }
    if (x.rows() != batch) throw ShapeError("gru: batch size changes across steps");
    h = gru_cell(bound, prefix, tape.constant(x), h);
  }
  return h;
}

Vector gru_forward(const ParamSet& params, const std::string& prefix, const Matrix& window) {
  Tape tape;
  Binding bound(tape, params);
  std::vector<Matrix> steps;
  steps.reserve(static_cast<std::size_t>(window.rows()));
  for (Index t = 0; t < window.rows(); ++t) steps.emplace_back(window.row(t));
  Var h = gru_sequence(bound, prefix, steps);
  return h.value().row(0).transpose();
}

std::vector<Matrix> time_major(const std::vector<Matrix>& windows) {
  if (windows.empty()) return {};
  const Index w = windows.front().rows();
  const Index n = windows.front().cols();
  std::vector<Matrix> steps(static_cast<std::size_t>(w), Matrix(static_cast<Index>(windows.size()), n));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const Matrix& win = windows[b];
    if (win.rows() != w || win.cols() != n) throw ShapeError("time_major: ragged window batch");
    for (Index t = 0; t < w; ++t) steps[static_cast<std::size_t>(t)].row(static_cast<Index>(b)) = win.row(t);
  }
  return steps;
}

}  // namespace carots::nnet
