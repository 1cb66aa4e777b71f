#include "carots/nnet/ops.hpp"

#include "carots/error.hpp"

#include <cmath>
#include <string>

namespace carots::nnet {
namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ShapeError("use of an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw ShapeError("operands recorded on different tapes");
  return t;
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
}

void require_row(const char* op, const Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError(std::string(op) + ": expected 1x" + std::to_string(a.cols()) +
                     " row, got " + shape_of(row));
  }
}

// d/dx of y = x / |x| per row, given y, |x| and upstream dy.
Matrix normalize_rows_backward(const Matrix& y, const Vector& norms, const Matrix& dy) {
  Matrix dx(y.rows(), y.cols());
  for (Index r = 0; r < y.rows(); ++r) {
    const double proj = y.row(r).dot(dy.row(r));
    dx.row(r) = (dy.row(r) - proj * y.row(r)) / norms(r);
  }
  return dx;
}

Matrix normalized(const Matrix& x, Vector& norms) {
  norms = x.rowwise().norm();
  Matrix y(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    if (norms(r) == 0.0) throw NumericalError("normalize_rows: zero-norm row " + std::to_string(r));
    y.row(r) = x.row(r) / norms(r);
  }
  return y;
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a.value(), b.value());
  return t.record(
      a.value() + b.value(), {a, b},
      [a, b](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, g);
        tp.accumulate(b, g);
      },
      "add");
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a.value(), b.value());
  return t.record(
      a.value() - b.value(), {a, b},
      [a, b](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, g);
        tp.accumulate(b, -g);
      },
      "sub");
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("mul", a.value(), b.value());
  return t.record(
      a.value().cwiseProduct(b.value()), {a, b},
      [a, b](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, g.cwiseProduct(b.value()));
        tp.accumulate(b, g.cwiseProduct(a.value()));
      },
      "mul");
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_of(a.value()) + " * " + shape_of(b.value()));
  }
  return t.record(
      a.value() * b.value(), {a, b},
      [a, b](Tape& tp, const Matrix& g, const Matrix&) {
        if (tp.needs_grad(a)) tp.accumulate(a, g * b.value().transpose());
        if (tp.needs_grad(b)) tp.accumulate(b, a.value().transpose() * g);
      },
      "matmul");
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  require_row("add_row", a.value(), row.value());
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(
      std::move(out), {a, row},
      [a, row](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, g);
        tp.accumulate(row, g.colwise().sum());
      },
      "add_row");
}

Var mul_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  require_row("mul_row", a.value(), row.value());
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return t.record(
      std::move(out), {a, row},
      [a, row](Tape& tp, const Matrix& g, const Matrix&) {
        if (tp.needs_grad(a)) {
          Matrix ga = g.array().rowwise() * row.value().row(0).array();
          tp.accumulate(a, ga);
        }
        if (tp.needs_grad(row)) tp.accumulate(row, g.cwiseProduct(a.value()).colwise().sum());
      },
      "mul_row");
}

Var affine(Var a, double scale, double shift) {
  Tape& t = tape_of(a);
  Matrix out = (scale * a.value()).array() + shift;
  return t.record(
      std::move(out), {a},
      [a, scale](Tape& tp, const Matrix& g, const Matrix&) { tp.accumulate(a, scale * g); },
      "affine");
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  return t.record(
      a.value().array().tanh().matrix(), {a},
      [a](Tape& tp, const Matrix& g, const Matrix& y) {
        tp.accumulate(a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
      },
      "tanh");
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().unaryExpr([](double x) {
    // Split on sign so exp() never overflows.
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return t.record(
      std::move(out), {a},
      [a](Tape& tp, const Matrix& g, const Matrix& y) {
        tp.accumulate(a, g.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
      },
      "sigmoid");
}

Var exp(Var a) {
  Tape& t = tape_of(a);
  return t.record(
      a.value().array().exp().matrix(), {a},
      [a](Tape& tp, const Matrix& g, const Matrix& y) { tp.accumulate(a, g.cwiseProduct(y)); },
      "exp");
}

Var log(Var a) {
  Tape& t = tape_of(a);
  return t.record(
      a.value().array().log().matrix(), {a},
      [a](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, g.cwiseQuotient(a.value()));
      },
      "log");
}

Var square(Var a) {
  Tape& t = tape_of(a);
  return t.record(
      a.value().array().square().matrix(), {a},
      [a](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
      },
      "square");
}

Var smooth_abs(Var a, double eps) {
  Tape& t = tape_of(a);
  Matrix out = (a.value().array().square() + eps).sqrt().matrix();
  return t.record(
      std::move(out), {a},
      [a](Tape& tp, const Matrix& g, const Matrix& y) {
        tp.accumulate(a, g.cwiseProduct(a.value().cwiseQuotient(y)));
      },
      "smooth_abs");
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(
      std::move(out), {a},
      [a](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
      },
      "sum");
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("mean of an empty node");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return t.record(
      std::move(out), {a},
      [a, n](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
      },
      "mean");
}

Var l2_norm(Var a) {
  Tape& t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().norm();
  return t.record(
      std::move(out), {a},
      [a](Tape& tp, const Matrix& g, const Matrix& y) {
        if (y(0, 0) == 0.0) return;
        tp.accumulate(a, (g(0, 0) / y(0, 0)) * a.value());
      },
      "l2_norm");
}

Var normalize_rows(Var a) {
  Tape& t = tape_of(a);
  Vector norms;
  Matrix out = normalized(a.value(), norms);
  return t.record(
      std::move(out), {a},
      [a, norms](Tape& tp, const Matrix& g, const Matrix& y) {
        tp.accumulate(a, normalize_rows_backward(y, norms, g));
      },
      "normalize_rows");
}

Var cosine_similarity(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.cols()) {
    throw ShapeError("cosine_similarity: " + shape_of(a.value()) + " vs " + shape_of(b.value()));
  }
  Vector na;
  Vector nb;
  Matrix ya = normalized(a.value(), na);
  Matrix yb = normalized(b.value(), nb);
  Matrix out = ya * yb.transpose();
  return t.record(
      std::move(out), {a, b},
      [a, b, ya, yb, na, nb](Tape& tp, const Matrix& g, const Matrix&) {
        if (tp.needs_grad(a)) tp.accumulate(a, normalize_rows_backward(ya, na, g * yb));
        if (tp.needs_grad(b)) {
          tp.accumulate(b, normalize_rows_backward(yb, nb, g.transpose() * ya));
        }
      },
      "cosine_similarity");
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  return t.record(
      a.value().transpose(), {a},
      [a](Tape& tp, const Matrix& g, const Matrix&) { tp.accumulate(a, g.transpose()); },
      "transpose");
}

Var column(Var a, Index j) {
  Tape& t = tape_of(a);
  if (j < 0 || j >= a.cols()) {
    throw ShapeError("column " + std::to_string(j) + " of " + shape_of(a.value()));
  }
  return t.record(
      a.value().col(j), {a},
      [a, j](Tape& tp, const Matrix& g, const Matrix&) {
        Matrix full = Matrix::Zero(a.rows(), a.cols());
        full.col(j) = g.col(0);
        tp.accumulate(a, full);
      },
      "column");
}

Var tile(Var a, Index row_reps, Index col_reps) {
  Tape& t = tape_of(a);
  if (row_reps < 1 || col_reps < 1) throw ShapeError("tile: repetitions must be >= 1");
  return t.record(
      a.value().replicate(row_reps, col_reps), {a},
      [a, row_reps, col_reps](Tape& tp, const Matrix& g, const Matrix&) {
        const Index r = a.rows();
        const Index c = a.cols();
        Matrix acc = Matrix::Zero(r, c);
        for (Index i = 0; i < row_reps; ++i) {
          for (Index k = 0; k < col_reps; ++k) acc += g.block(i * r, k * c, r, c);
        }
        tp.accumulate(a, acc);
      },
      "tile");
}

Var hconcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("hconcat of zero parts");
  Tape& t = tape_of(parts.front());
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    tape_of(parts.front(), p);
    if (p.rows() != rows) throw ShapeError("hconcat: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return t.record(
      std::move(out), parts,
      [parts](Tape& tp, const Matrix& g, const Matrix&) {
        Index off = 0;
        for (const Var& p : parts) {
          tp.accumulate(p, g.middleCols(off, p.cols()));
          off += p.cols();
        }
      },
      "hconcat");
}

}  // namespace carots::nnet
