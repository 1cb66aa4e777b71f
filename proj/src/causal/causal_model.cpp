#include "carots/causal/causal_model.hpp"

#include "carots/error.hpp"
#include "carots/nnet/checkpoint.hpp"
#include "carots/nnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace carots::causal {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid_of(const Matrix& raw) { return raw.unaryExpr(&stable_sigmoid); }

}  // namespace

// ---- CausalityMatrix ---------------------------------------------------------

CausalityMatrix::CausalityMatrix(Matrix raw, double threshold)
    : raw_(std::move(raw)), threshold_(threshold) {
  if (raw_.rows() != raw_.cols()) throw ShapeError("causality matrix must be square");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("gate threshold must lie in (0, 1)");
  gates_ = sigmoid_of(raw_);
  binary_ = (gates_.array() >= threshold_).cast<double>().matrix();
}

CausalityMatrix CausalityMatrix::from_gates(const Matrix& gates, double threshold) {
  const double lo = 1e-12;
  Matrix raw = gates.unaryExpr([lo](double g) {
    const double c = std::clamp(g, lo, 1.0 - lo);
    return std::log(c / (1.0 - c));
  });
  return CausalityMatrix(std::move(raw), threshold);
}

std::vector<Index> CausalityMatrix::parents(Index j) const {
  if (j < 0 || j >= variables()) throw ConfigError("variable index out of range");
  std::vector<Index> out;
  for (Index i = 0; i < variables(); ++i)
    if (binary_(i, j) != 0.0) out.push_back(i);
  return out;
}

std::vector<Index> CausalityMatrix::children(Index i) const {
  if (i < 0 || i >= variables()) throw ConfigError("variable index out of range");
  std::vector<Index> out;
  for (Index j = 0; j < variables(); ++j)
    if (binary_(i, j) != 0.0) out.push_back(j);
  return out;
}

CausalityMatrix binarize(const Matrix& raw, double threshold) { return CausalityMatrix(raw, threshold); }

// ---- Config ------------------------------------------------------------------

void CausalConfig::validate() const {
  if (window < 2) throw ConfigError("causal window must be at least 2");
  if (hidden < 1) throw ConfigError("causal hidden size must be positive");
  if (lambda_sparse < 0.0) throw ConfigError("lambda_sparse must be non-negative");
  if (weight_ridge < 0.0) throw ConfigError("weight_ridge must be non-negative");
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) throw ConfigError("gate threshold must lie in (0, 1)");
  if (epochs < 1) throw ConfigError("causal epochs must be positive");
  if (batch_size < 1) throw ConfigError("causal batch size must be positive");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

// ---- CausalModel -------------------------------------------------------------

CausalModel::CausalModel(Index variables, const CausalConfig& cfg, nnet::Rng& rng)
    : variables_(variables),
      window_(cfg.window),
      hidden_(cfg.hidden),
      lambda_sparse_(cfg.lambda_sparse),
      gate_threshold_(cfg.gate_threshold),
      weight_ridge_(cfg.weight_ridge) {
  cfg.validate();
  if (variables < 1) throw ConfigError("causal model needs at least one variable");
  const Index in = (window_ - 1) * variables_;
  params_.add(kGateLogits, Matrix::Constant(variables_, variables_, cfg.gate_init));
  for (Index i = 0; i < variables_; ++i) {
    params_.add(hidden_weight(i), nnet::uniform_init(in, hidden_, in, rng));
    params_.add(hidden_bias(i), nnet::uniform_init(1, hidden_, in, rng));
    params_.add(output_weight(i), nnet::uniform_init(hidden_, 1, hidden_, rng));
    params_.add(output_bias(i), nnet::uniform_init(1, 1, hidden_, rng));
  }
}

CausalModel::CausalModel(nnet::ParamSet params, Index window, double lambda_sparse,
                         double gate_threshold, double weight_ridge)
    : params_(std::move(params)),
      window_(window),
      lambda_sparse_(lambda_sparse),
      gate_threshold_(gate_threshold),
      weight_ridge_(weight_ridge) {
  if (window_ < 2) throw ConfigError("causal window must be at least 2");
  if (weight_ridge_ < 0.0) throw ConfigError("weight_ridge must be non-negative");
  variables_ = params_.at(kGateLogits).value.rows();
  hidden_ = params_.at(hidden_weight(0)).value.cols();
  check_shapes();
}

void CausalModel::check_shapes() const {
  const Index in = (window_ - 1) * variables_;
  auto expect = [&](const std::string& name, Index r, Index c) {
    const Matrix& v = params_.at(name).value;
    if (v.rows() != r || v.cols() != c) {
      throw ShapeError("parameter '" + name + "' has shape " + std::to_string(v.rows()) + "x" +
                       std::to_string(v.cols()) + ", expected " + std::to_string(r) + "x" +
                       std::to_string(c));
    }
  };
  expect(kGateLogits, variables_, variables_);
  for (Index i = 0; i < variables_; ++i) {
    expect(hidden_weight(i), in, hidden_);
    expect(hidden_bias(i), 1, hidden_);
    expect(output_weight(i), hidden_, 1);
    expect(output_bias(i), 1, 1);
  }
  if (params_.size() != static_cast<std::size_t>(1 + 4 * variables_)) {
    throw ShapeError("causal model has unexpected extra parameters");
  }
}

Matrix CausalModel::gates() const { return sigmoid_of(params_.at(kGateLogits).value); }

CausalityMatrix CausalModel::matrix() const {
  return CausalityMatrix(params_.at(kGateLogits).value, gate_threshold_);
}

Matrix CausalModel::forecast_flat(const Matrix& inputs) const {
  const Index in = (window_ - 1) * variables_;
  if (inputs.cols() != in) {
    throw ShapeError("forecast input has " + std::to_string(inputs.cols()) + " columns, expected " +
                     std::to_string(in));
  }
  const Matrix g = gates();
  Matrix out(inputs.rows(), variables_);
  Eigen::RowVectorXd mask(in);
  for (Index i = 0; i < variables_; ++i) {
    for (Index l = 0; l + 1 < window_; ++l) mask.segment(l * variables_, variables_) = g.col(i).transpose();
    // Folding the mask into W1 is cheaper than masking every input row.
    const Matrix w1 = mask.transpose().asDiagonal() * params_.at(hidden_weight(i)).value;
    Matrix h = (inputs * w1).rowwise() + params_.at(hidden_bias(i)).value.row(0);
    h = h.array().tanh().matrix();
    out.col(i) = (h * params_.at(output_weight(i)).value).array() +
                 params_.at(output_bias(i)).value(0, 0);
  }
  return out;
}

Vector CausalModel::forecast(const Matrix& history) const {
  if (history.rows() != window_ - 1 || history.cols() != variables_) {
    throw ShapeError("forecast history must be " + std::to_string(window_ - 1) + "x" +
                     std::to_string(variables_) + ", got " + std::to_string(history.rows()) + "x" +
                     std::to_string(history.cols()));
  }
  Matrix flat(1, history.size());
  for (Index l = 0; l < history.rows(); ++l) flat.block(0, l * variables_, 1, variables_) = history.row(l);
  return forecast_flat(flat).row(0).transpose();
}

Matrix CausalModel::forecast_windows(const std::vector<Matrix>& windows) const {
  Matrix inputs;
  Matrix targets;
  split_windows(windows, inputs, targets);
  return forecast_flat(inputs);
}

nnet::Var CausalModel::objective(nnet::Binding& bound, const Matrix& inputs,
                                 const Matrix& targets) const {
  using namespace nnet;
  if (inputs.cols() != (window_ - 1) * variables_ || targets.cols() != variables_ ||
      inputs.rows() != targets.rows()) {
    throw ShapeError("causal objective: inputs/targets shape mismatch");
  }
  Tape& tape = bound.tape();
  Var x = tape.constant(inputs);
  Var g = sigmoid(bound[kGateLogits]);
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(variables_));
  for (Index i = 0; i < variables_; ++i) {
    Var mask = tile(transpose(column(g, i)), 1, window_ - 1);
    Var h = tanh(add_row(matmul(mul_row(x, mask), bound[hidden_weight(i)]), bound[hidden_bias(i)]));
    outs.push_back(add_row(matmul(h, bound[output_weight(i)]), bound[output_bias(i)]));
  }
  Var pred = hconcat(outs);
  Var loss = mean(square(sub(pred, tape.constant(targets))));
  if (lambda_sparse_ != 0.0) loss = add(loss, affine(sum(smooth_abs(g)), lambda_sparse_));
  if (weight_ridge_ != 0.0) {
    for (Index i = 0; i < variables_; ++i) {
      loss = add(loss, affine(sum(square(bound[hidden_weight(i)])), weight_ridge_));
    }
  }
  return loss;
}

double CausalModel::objective_value(const Matrix& inputs, const Matrix& targets) const {
  const Matrix pred = forecast_flat(inputs);
  const double mse = (pred - targets).squaredNorm() / static_cast<double>(pred.size());
  const double l1 = gates().array().square().unaryExpr([](double v) { return std::sqrt(v + 1e-12); }).sum();
  double ridge = 0.0;
  if (weight_ridge_ != 0.0) {
    for (Index i = 0; i < variables_; ++i) ridge += params_.at(hidden_weight(i)).value.squaredNorm();
  }
  return mse + lambda_sparse_ * l1 + weight_ridge_ * ridge;
}

void split_windows(const std::vector<Matrix>& windows, Matrix& inputs, Matrix& targets) {
  if (windows.empty()) throw ShapeError("no windows to split");
  const Index w = windows.front().rows();
  const Index n = windows.front().cols();
  if (w < 2) throw ShapeError("windows must have at least 2 rows");
  inputs.resize(static_cast<Index>(windows.size()), (w - 1) * n);
  targets.resize(static_cast<Index>(windows.size()), n);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const Matrix& win = windows[b];
    if (win.rows() != w || win.cols() != n) throw ShapeError("windows differ in shape");
    const Index r = static_cast<Index>(b);
    for (Index l = 0; l + 1 < w; ++l) inputs.block(r, l * n, 1, n) = win.row(l);
    targets.row(r) = win.row(w - 1);
  }
}

// ---- Training ----------------------------------------------------------------

namespace {

double dataset_objective(const CausalModel& model, const data::WindowSet& ws) {
  Matrix inputs;
  Matrix targets;
  split_windows(ws.all(), inputs, targets);
  return model.objective_value(inputs, targets);
}

}  // namespace

CausalTrainResult train_causal_discoverer(const data::WindowSet& train, const CausalConfig& cfg,
                                          const data::WindowSet* val) {
  cfg.validate();
  if (train.size() < 1) throw ConfigError("no training windows for causal discovery");
  if (train.width() != cfg.window) {
    throw ConfigError("training windows have width " + std::to_string(train.width()) +
                      " but the causal config expects " + std::to_string(cfg.window));
  }
  if (val != nullptr && (val->width() != cfg.window || val->variables() != train.variables())) {
    throw ConfigError("validation windows do not match the training windows");
  }

  nnet::Rng rng(cfg.seed);
  CausalTrainResult result;
  CausalModel model(train.variables(), cfg, rng);
  nnet::AdamConfig adam_cfg = cfg.adam;
  adam_cfg.total_epochs = static_cast<double>(cfg.epochs);
  nnet::Adam adam(adam_cfg);

  std::vector<Index> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const Index batches = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  double best = std::numeric_limits<double>::infinity();
  nnet::ParamSet best_params = model.params();

  Matrix inputs;
  Matrix targets;
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    CausalEpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0.0;
    for (Index b = 0; b < batches; ++b) {
      const Index begin = b * cfg.batch_size;
      const Index count = std::min(cfg.batch_size, train.size() - begin);
      split_windows(train.gather(std::span<const Index>(order.data() + begin, static_cast<std::size_t>(count))),
                    inputs, targets);
      nnet::Tape tape;
      nnet::Binding bound(tape, model.params());
      nnet::Var loss = model.objective(bound, inputs, targets);
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw NumericalError("causal discovery loss diverged at epoch " + std::to_string(epoch) +
                             ", step " + std::to_string(b));
      }
      model.params().zero_grad();
      tape.backward(loss);
      const double progress = static_cast<double>(epoch) + static_cast<double>(b + 1) / static_cast<double>(batches);
      entry.learning_rate = adam.step(model.params(), progress).learning_rate;
      loss_sum += value * static_cast<double>(count);
    }
    entry.train_loss = loss_sum / static_cast<double>(train.size());
    entry.val_loss = val != nullptr ? dataset_objective(model, *val) : dataset_objective(model, train);
    if (!std::isfinite(entry.val_loss)) {
      throw NumericalError("causal discovery validation loss diverged at epoch " + std::to_string(epoch));
    }
    if (entry.val_loss < best) {
      best = entry.val_loss;
      best_params = model.params();
      result.best_epoch = epoch;
    }
    result.log.push_back(entry);
  }
  model.params() = std::move(best_params);
  model.params().zero_grad();
  result.model = std::move(model);
  return result;
}

// ---- Persistence -------------------------------------------------------------

void save_causal_model(const std::filesystem::path& path, const CausalModel& model) {
  nlohmann::json meta = {{"kind", "causal"},
                         {"variables", model.variables()},
                         {"window", model.window()},
                         {"hidden", model.hidden()},
                         {"lambda_sparse", model.lambda_sparse()},
                         {"gate_threshold", model.gate_threshold()},
                         {"weight_ridge", model.weight_ridge()}};
  nnet::save_checkpoint(path, model.params(), meta);
}

CausalModel load_causal_model(const std::filesystem::path& path) {
  nnet::Checkpoint ck = nnet::load_checkpoint(path);
  if (ck.meta.value("kind", "") != "causal") {
    throw ParseError(path.string() + " is not a causal model checkpoint");
  }
  return CausalModel(std::move(ck.params), ck.meta.at("window").get<Index>(),
                     ck.meta.at("lambda_sparse").get<double>(),
                     ck.meta.at("gate_threshold").get<double>(), ck.meta.value("weight_ridge", 0.0));
}

nlohmann::json causality_report(const CausalModel& model, const std::vector<std::string>& names) {
  const CausalityMatrix m = model.matrix();
  const Index n = m.variables();
  if (static_cast<Index>(names.size()) != n) throw ShapeError("name count does not match variables");
  auto rows = [](const Matrix& a) {
    nlohmann::json out = nlohmann::json::array();
    for (Index i = 0; i < a.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  nlohmann::json parents = nlohmann::json::object();
  nlohmann::json children = nlohmann::json::object();
  for (Index i = 0; i < n; ++i) {
    nlohmann::json pa = nlohmann::json::array();
    nlohmann::json ch = nlohmann::json::array();
    for (Index p : m.parents(i)) pa.push_back(names[static_cast<std::size_t>(p)]);
    for (Index c : m.children(i)) ch.push_back(names[static_cast<std::size_t>(c)]);
    parents[names[static_cast<std::size_t>(i)]] = std::move(pa);
    children[names[static_cast<std::size_t>(i)]] = std::move(ch);
  }
  Matrix binary = m.binary();
  nlohmann::json bin = nlohmann::json::array();
  for (Index i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < n; ++j) row.push_back(static_cast<int>(binary(i, j)));
    bin.push_back(std::move(row));
  }
  return {{"variables", names},
          {"gate_threshold", m.threshold()},
          {"raw", rows(m.raw())},
          {"gates", rows(m.gates())},
          {"binary", std::move(bin)},
          {"parents", std::move(parents)},
          {"children", std::move(children)}};
}

}  // namespace carots::causal
