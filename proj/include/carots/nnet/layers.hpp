#pragma once

#include "carots/nnet/ops.hpp"
#include "carots/nnet/param_set.hpp"

#include <string>
#include <vector>

namespace carots::nnet {

// Parameter naming: every layer owns "<prefix>.<name>" entries in a ParamSet.

/// Dense layer y = x W + b with W (in x out) and b (1 x out).
void add_linear(ParamSet& params, const std::string& prefix, Index in, Index out, Rng& rng);
Var linear(Binding& bound, const std::string& prefix, Var x);

/// Gated recurrent unit:
///   r = sigmoid(x W_r + h U_r + b_r)
///   z = sigmoid(x W_z + h U_z + b_z)
///   n = tanh(x W_n + (r * h) U_n + b_n)
///   h' = (1 - z) * n + z * h
/// starting from h = 0.
void add_gru(ParamSet& params, const std::string& prefix, Index input, Index hidden, Rng& rng);

/// One cell application over a batch: x (B x input), h (B x hidden).
Var gru_cell(Binding& bound, const std::string& prefix, Var x, Var h);

/// Runs the recurrence over `steps` (each B x input, in time order) and
/// returns the final hidden state (B x hidden).
Var gru_sequence(Binding& bound, const std::string& prefix, const std::vector<Matrix>& steps);

/// Final hidden state for a single window (w x input, rows in time order).
Vector gru_forward(const ParamSet& params, const std::string& prefix, const Matrix& window);

/// Hidden size of a GRU registered under `prefix`.
Index gru_hidden_size(const ParamSet& params, const std::string& prefix);
Index gru_input_size(const ParamSet& params, const std::string& prefix);

/// Splits a batch of windows (each w x N) into w time-step matrices (each B x N).
std::vector<Matrix> time_major(const std::vector<Matrix>& windows);

}  // namespace carots::nnet
