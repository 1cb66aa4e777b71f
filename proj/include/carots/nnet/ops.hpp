#pragma once

#include "carots/nnet/tape.hpp"

#include <vector>

// Differentiable primitives over Tape nodes. All operate on double matrices;
// reductions return 1x1 nodes.
namespace carots::nnet {

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Element-wise product.
Var mul(Var a, Var b);
Var matmul(Var a, Var b);
/// a (r x c) + row (1 x c), broadcast over rows.
Var add_row(Var a, Var row);
/// a (r x c) * row (1 x c), broadcast over rows.
Var mul_row(Var a, Var row);
/// scale * a + shift
Var affine(Var a, double scale, double shift = 0.0);

Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
/// sqrt(a^2 + eps): differentiable stand-in for |a|.
Var smooth_abs(Var a, double eps = 1e-12);

Var sum(Var a);
Var mean(Var a);
/// Frobenius norm.
Var l2_norm(Var a);
/// Each row divided by its L2 norm.
Var normalize_rows(Var a);
/// C(i, j) = cos(a.row(i), b.row(j)).
Var cosine_similarity(Var a, Var b);

Var transpose(Var a);
Var column(Var a, Index j);
Var tile(Var a, Index row_reps, Index col_reps);
Var hconcat(const std::vector<Var>& parts);

}  // namespace carots::nnet
