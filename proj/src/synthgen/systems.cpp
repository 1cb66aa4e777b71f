#include "carots/synthgen/systems.hpp"

#include "carots/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

namespace carots::synth {

void Lorenz96Config::validate() const {
  if (variables < 4) throw ConfigError("Lorenz96 needs N >= 4");
  if (!(dt > 0.0)) throw ConfigError("Lorenz96 dt must be > 0");
  if (length < 1) throw ConfigError("Lorenz96 length must be >= 1");
  if (sample_stride < 1) throw ConfigError("Lorenz96 sample_stride must be >= 1");
  if (burn_in < 0) throw ConfigError("Lorenz96 burn_in must be >= 0");
  if (initial_state && initial_state->size() != variables) {
    throw ConfigError("Lorenz96 initial_state has the wrong size");
  }
}

Vector lorenz96_derivative(const Vector& x, double forcing) {
  const Index n = x.size();
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double next = x((i + 1) % n);
    const double prev = x((i + n - 1) % n);
    const double prev2 = x((i + n - 2) % n);
    d(i) = (next - prev2) * prev - x(i) + forcing;
  }
  return d;
}

Vector lorenz96_rk4_step(const Vector& x, double forcing, double dt) {
  const Vector k1 = lorenz96_derivative(x, forcing);
  const Vector k2 = lorenz96_derivative(x + 0.5 * dt * k1, forcing);
  const Vector k3 = lorenz96_derivative(x + 0.5 * dt * k2, forcing);
  const Vector k4 = lorenz96_derivative(x + dt * k3, forcing);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

LabeledSeries generate_lorenz96(const Lorenz96Config& cfg) {
  cfg.validate();
  Vector x;
  if (cfg.initial_state) {
    x = *cfg.initial_state;
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.init_noise_std);
    x = Vector::Constant(cfg.variables, cfg.forcing);
    for (Index i = 0; i < cfg.variables; ++i) x(i) += noise(rng);
  }

  Index step = 0;
  auto advance = [&]() {
    x = lorenz96_rk4_step(x, cfg.forcing, cfg.dt);
    ++step;
    if (!x.allFinite()) {
      throw NumericalError("Lorenz96 integration diverged at step " + std::to_string(step));
    }
  };
  for (Index b = 0; b < cfg.burn_in; ++b) advance();

  Matrix values(cfg.length, cfg.variables);
  for (Index t = 0; t < cfg.length; ++t) {
    if (t > 0) {
      for (Index s = 0; s < cfg.sample_stride; ++s) advance();
    }
    values.row(t) = x.transpose();
  }
  return LabeledSeries::unlabeled(std::move(values));
}

Matrix lorenz96_ground_truth(Index n) {
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index offset : {-2, -1, 0, 1}) a((i + offset + n) % n, i) = 1.0;
  }
  return a;
}

double companion_spectral_radius(const std::vector<Matrix>& coefficients) {
  if (coefficients.empty()) throw ConfigError("VAR needs at least one lag");
  const Index n = coefficients.front().rows();
  const Index p = static_cast<Index>(coefficients.size());
  Matrix companion = Matrix::Zero(n * p, n * p);
  for (Index k = 0; k < p; ++k) {
    const Matrix& a = coefficients[static_cast<std::size_t>(k)];
    if (a.rows() != n || a.cols() != n) throw ConfigError("VAR coefficients must all be N x N");
    companion.block(0, k * n, n, n) = a;
  }
  if (p > 1) companion.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  Eigen::EigenSolver<Matrix> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

VarProcess::VarProcess(std::vector<Matrix> coefficients) : coefficients_(std::move(coefficients)) {
  radius_ = companion_spectral_radius(coefficients_);
  if (!(radius_ < 1.0)) {
    throw ConfigError("VAR coefficients are not stationary: companion spectral radius " +
                      data::format_double(radius_) + " >= 1");
  }
}

Matrix VarProcess::simulate(const Matrix& noise) const {
  const Index n = variables();
  if (noise.cols() != n) throw ShapeError("VAR noise has the wrong width");
  Matrix x = Matrix::Zero(noise.rows(), n);
  for (Index t = 0; t < noise.rows(); ++t) {
    Vector next = noise.row(t).transpose();
    for (Index k = 1; k <= lag() && t - k >= 0; ++k) {
      next += coefficients_[static_cast<std::size_t>(k - 1)] * x.row(t - k).transpose();
    }
    x.row(t) = next.transpose();
  }
  return x;
}

std::vector<Matrix> random_sparse_var_coefficients(Index n, Index lag, double density,
                                                   std::uint64_t seed, double max_radius) {
  if (n < 2 || lag < 1) throw ConfigError("VAR needs N >= 2 and lag >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("VAR density must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  const Index cross = std::clamp<Index>(static_cast<Index>(std::llround(density * static_cast<double>(n))), 1, n - 1);
  Matrix base = Matrix::Identity(n, n);
  std::vector<Index> others(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::iota(others.begin(), others.end(), 0);
    for (auto& o : others) {
      if (o >= i) ++o;
    }
    std::shuffle(others.begin(), others.end(), rng);
    for (Index k = 0; k < cross; ++k) base(i, others[static_cast<std::size_t>(k)]) = 1.0;
  }
  std::vector<Matrix> coeffs(static_cast<std::size_t>(lag), base);
  while (companion_spectral_radius(coeffs) > max_radius) {
    for (auto& c : coeffs) c *= 0.95;
  }
  return coeffs;
}

std::vector<Matrix> VarConfig::resolved_coefficients() const {
  if (!coefficients.empty()) return coefficients;
  return random_sparse_var_coefficients(variables, lag, density, seed);
}

LabeledSeries generate_var(const VarConfig& cfg) {
  if (cfg.length < 1) throw ConfigError("VAR length must be >= 1");
  if (cfg.noise_std < 0.0) throw ConfigError("VAR noise_std must be >= 0");
  VarProcess process(cfg.resolved_coefficients());
  // Separate stream from the coefficient draw so the two stay independent.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix noise(cfg.length, process.variables());
  for (Index t = 0; t < cfg.length; ++t) {
    for (Index i = 0; i < process.variables(); ++i) noise(t, i) = cfg.noise_std * dist(rng);
  }
  return LabeledSeries::unlabeled(process.simulate(noise));
}

Matrix var_ground_truth(const std::vector<Matrix>& coefficients) {
  const Index n = coefficients.front().rows();
  Matrix a = Matrix::Zero(n, n);
  for (const Matrix& c : coefficients) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (c(i, j) != 0.0) a(j, i) = 1.0;
      }
    }
  }
  return a;
}

}  // namespace carots::synth
