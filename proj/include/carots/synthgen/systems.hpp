#pragma once

#include "carots/dataio/series.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace carots::synth {

using data::Index;
using data::LabeledSeries;
using data::Matrix;
using Vector = Eigen::VectorXd;

// ---- Lorenz96 ----------------------------------------------------------------
//   dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F,  indices cyclic.

struct Lorenz96Config {
  Index variables = 128;
  double forcing = 10.0;
  Index length = 40000;
  double dt = 0.05;
  Index sample_stride = 1;
  /// Integration steps discarded before the first recorded sample.
  Index burn_in = 1000;
  /// Std of the Gaussian perturbation added to the all-F initial state.
  double init_noise_std = 0.1;
  std::uint64_t seed = 0;
  /// Overrides the random initial state when set.
  std::optional<Vector> initial_state;

  void validate() const;
};

Vector lorenz96_derivative(const Vector& x, double forcing);
/// One classical 4th-order Runge-Kutta step.
Vector lorenz96_rk4_step(const Vector& x, double forcing, double dt);
/// T x N series (labels all 0). Throws NumericalError naming the step on divergence.
LabeledSeries generate_lorenz96(const Lorenz96Config& cfg);
/// Ground-truth parent matrix: (j, i) = 1 iff j in {i-2, i-1, i, i+1} (mod N).
Matrix lorenz96_ground_truth(Index n);

// ---- VAR -------------------------------------------------------------------------
//   x_t = sum_{k=1..p} A_k x_{t-k} + eps_t,  eps_t ~ N(0, sigma^2 I)

/// Validated VAR coefficients. Construction fails unless the companion matrix
/// has spectral radius < 1.
class VarProcess {
 public:
  explicit VarProcess(std::vector<Matrix> coefficients);

  Index variables() const { return coefficients_.front().rows(); }
  Index lag() const { return static_cast<Index>(coefficients_.size()); }
  const std::vector<Matrix>& coefficients() const { return coefficients_; }
  double spectral_radius() const { return radius_; }

  /// Iterates the recurrence from zero history, adding row t of `noise` at step t.
  Matrix simulate(const Matrix& noise) const;

 private:
  std::vector<Matrix> coefficients_;
  double radius_ = 0.0;
};

double companion_spectral_radius(const std::vector<Matrix>& coefficients);

/// Sparse random coefficients: self-edges plus round(density * N) (at least 1)
/// random cross-parents per variable, identical across lags, then shrunk by
/// 0.95 until the spectral radius drops to `max_radius` or below.
std::vector<Matrix> random_sparse_var_coefficients(Index n, Index lag, double density,
                                                   std::uint64_t seed, double max_radius = 0.97);

struct VarConfig {
  Index variables = 128;
  Index lag = 2;
  double density = 0.1;
  /// Empty: drawn by random_sparse_var_coefficients(variables, lag, density, seed).
  std::vector<Matrix> coefficients;
  double noise_std = 0.1;
  Index length = 40000;
  std::uint64_t seed = 0;

  /// Materializes `coefficients` when empty and validates them.
  std::vector<Matrix> resolved_coefficients() const;
};

LabeledSeries generate_var(const VarConfig& cfg);
/// (j, i) = 1 iff any lag coefficient A_k(i, j) != 0.
Matrix var_ground_truth(const std::vector<Matrix>& coefficients);

}  // namespace carots::synth
