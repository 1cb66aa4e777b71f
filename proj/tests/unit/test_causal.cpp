#include "doctest.h"

#include "gradient_check.hpp"
#include "oracles.hpp"

#include "carots/causal/causal_model.hpp"
#include "carots/error.hpp"
#include "carots/synthgen/systems.hpp"

#include <filesystem>
#include <random>
#include <set>

using namespace carots;
using namespace carots::causal;
using testing::pair_auroc;

namespace {

Matrix random_matrix(Index r, Index c, nnet::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

CausalConfig tiny_config(Index window, Index hidden) {
  CausalConfig cfg;
  cfg.window = window;
  cfg.hidden = hidden;
  return cfg;
}

data::LabeledSeries independent_ar1(Index t, Index n, double coef, double noise, std::uint64_t seed,
                                    Matrix* innovations = nullptr) {
  nnet::Rng rng(seed);
  std::normal_distribution<double> d(0.0, noise);
  Matrix x = Matrix::Zero(t, n);
  Matrix eps(t, n);
  for (Index i = 0; i < t; ++i) {
    for (Index j = 0; j < n; ++j) {
      eps(i, j) = d(rng);
      x(i, j) = (i > 0 ? coef * x(i - 1, j) : 0.0) + eps(i, j);
    }
  }
  if (innovations != nullptr) *innovations = eps;
  return data::LabeledSeries::unlabeled(x);
}

}  // namespace

TEST_CASE("binarize: all gates 0.9 give the complete graph") {
  CausalityMatrix m = CausalityMatrix::from_gates(Matrix::Constant(4, 4, 0.9));
  CHECK(m.binary() == Matrix::Ones(4, 4));
  CHECK(m.parents(2).size() == 4);
}

TEST_CASE("binarize: identity-only gates give self loops only") {
  Matrix g = Matrix::Constant(5, 5, 0.1);
  g.diagonal().setConstant(0.9);
  CausalityMatrix m = CausalityMatrix::from_gates(g);
  for (Index i = 0; i < 5; ++i) {
    CHECK(m.parents(i) == std::vector<Index>{i});
    CHECK(m.children(i) == std::vector<Index>{i});
  }
}

TEST_CASE("binarize: threshold rule and parent/child consistency on random matrices") {
  nnet::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix raw = random_matrix(7, 7, rng, 2.0);
    const double thr = 0.2 + 0.02 * trial;
    CausalityMatrix m = binarize(raw, thr);
    for (Index i = 0; i < 7; ++i) {
      for (Index j = 0; j < 7; ++j) {
        const double gate = 1.0 / (1.0 + std::exp(-raw(i, j)));
        CHECK(m.binary()(i, j) == (gate >= thr ? 1.0 : 0.0));
        const auto pa = m.parents(j);
        const auto ch = m.children(i);
        const bool i_parent_of_j = std::find(pa.begin(), pa.end(), i) != pa.end();
        const bool j_child_of_i = std::find(ch.begin(), ch.end(), j) != ch.end();
        CHECK(i_parent_of_j == j_child_of_i);
      }
    }
  }
  CHECK_THROWS_AS(binarize(Matrix::Zero(2, 3)), ShapeError);
  CHECK_THROWS_AS(binarize(Matrix::Zero(2, 2), 1.0), ConfigError);
}

TEST_CASE("zeroed parameters forecast the output bias") {
  nnet::Rng rng(1);
  CausalModel model(3, tiny_config(4, 5), rng);
  for (auto& [name, p] : model.params()) p.value.setZero();
  for (Index i = 0; i < 3; ++i) model.params().at(CausalModel::output_bias(i)).value(0, 0) = 0.5 * (i + 1);
  Vector y = model.forecast(random_matrix(3, 3, rng));
  CHECK(y(0) == 0.5);
  CHECK(y(1) == 1.0);
  CHECK(y(2) == 1.5);
}

TEST_CASE("forecast accepts a one-row history for window 2 and rejects bad shapes") {
  nnet::Rng rng(2);
  CausalModel model(4, tiny_config(2, 8), rng);
  CHECK(model.forecast(random_matrix(1, 4, rng)).size() == 4);
  CHECK_THROWS_AS(model.forecast(random_matrix(2, 4, rng)), ShapeError);
  CHECK_THROWS_AS(model.forecast(random_matrix(1, 3, rng)), ShapeError);
}

TEST_CASE("closed gates make a target invariant to the other variables") {
  nnet::Rng rng(3);
  CausalModel model(4, tiny_config(3, 6), rng);
  Matrix& logits = model.params().at(CausalModel::kGateLogits).value;
  logits = random_matrix(4, 4, rng);
  const Index target = 2;
  logits.col(target).setConstant(-1000.0);  // sigmoid underflows to exactly 0
  logits(target, target) = 1.5;
  const Matrix history = random_matrix(2, 4, rng);
  const Vector base = model.forecast(history);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix perturbed = history;
    for (Index j = 0; j < 4; ++j)
      if (j != target) perturbed.col(j) += random_matrix(2, 1, rng, 10.0);
    const Vector y = model.forecast(perturbed);
    CHECK(y(target) == base(target));
  }
  Matrix own = history;
  own(1, target) += 1.0;
  CHECK(model.forecast(own)(target) != base(target));
}

TEST_CASE("tape objective equals the tape-free value and the explicit formula") {
  nnet::Rng rng(4);
  CausalConfig cfg = tiny_config(3, 4);
  cfg.lambda_sparse = 0.05;
  cfg.weight_ridge = 0.02;
  CausalModel model(3, cfg, rng);
  model.params().at(CausalModel::kGateLogits).value = random_matrix(3, 3, rng);
  std::vector<Matrix> windows;
  for (int b = 0; b < 6; ++b) windows.push_back(random_matrix(3, 3, rng));
  Matrix inputs;
  Matrix targets;
  split_windows(windows, inputs, targets);
  CHECK(inputs.cols() == 6);
  CHECK(inputs.block(0, 3, 1, 3) == windows[0].row(1));

  // Explicit per-target oracle written from the model definition.
  const Matrix g = (1.0 + (-model.params().at(CausalModel::kGateLogits).value.array()).exp()).inverse().matrix();
  double sq = 0.0;
  for (int b = 0; b < 6; ++b) {
    for (Index i = 0; i < 3; ++i) {
      Eigen::RowVectorXd x(6);
      for (Index l = 0; l < 2; ++l)
        for (Index j = 0; j < 3; ++j) x(l * 3 + j) = windows[b](l, j) * g(j, i);
      const auto& p = model.params();
      Eigen::RowVectorXd h = (x * p.at(CausalModel::hidden_weight(i)).value + p.at(CausalModel::hidden_bias(i)).value).array().tanh().matrix();
      const double y = (h * p.at(CausalModel::output_weight(i)).value)(0, 0) + p.at(CausalModel::output_bias(i)).value(0, 0);
      sq += (y - windows[b](2, i)) * (y - windows[b](2, i));
    }
  }
  double ridge = 0.0;
  for (Index i = 0; i < 3; ++i) {
    const Matrix& w1 = model.params().at(CausalModel::hidden_weight(i)).value;
    for (Index r = 0; r < w1.rows(); ++r)
      for (Index c = 0; c < w1.cols(); ++c) ridge += w1(r, c) * w1(r, c);
  }
  const double expect = sq / 18.0 + 0.05 * g.array().abs().sum() + 0.02 * ridge;

  nnet::Tape tape;
  nnet::Binding bound(tape, std::as_const(model).params());
  const double on_tape = model.objective(bound, inputs, targets).scalar();
  CHECK(on_tape == doctest::Approx(expect).epsilon(1e-12));
  CHECK(model.objective_value(inputs, targets) == doctest::Approx(expect).epsilon(1e-12));
  CHECK((model.forecast_windows(windows).row(4).transpose() - model.forecast(windows[4].topRows(2))).norm() < 1e-14);
}

TEST_CASE("objective gradient matches central differences on 20 draws") {
  nnet::Rng rng(5);
  for (int draw = 0; draw < 20; ++draw) {
    CausalConfig cfg = tiny_config(3, 4);
    cfg.lambda_sparse = 0.1;
    cfg.weight_ridge = draw % 2 == 0 ? 0.0 : 0.05;
    CausalModel model(3, cfg, rng);
    model.params().at(CausalModel::kGateLogits).value = random_matrix(3, 3, rng);
    std::vector<Matrix> windows;
    for (int b = 0; b < 5; ++b) windows.push_back(random_matrix(3, 3, rng));
    Matrix inputs;
    Matrix targets;
    split_windows(windows, inputs, targets);
    auto with_grad = [&](nnet::ParamSet& ps) {
      nnet::Tape tape;
      nnet::Binding bound(tape, ps);
      nnet::Var loss = model.objective(bound, inputs, targets);
      tape.backward(loss);
      return loss.scalar();
    };
    auto value_only = [&](nnet::ParamSet&) { return model.objective_value(inputs, targets); };
    CHECK(testing::check_gradients(model.params(), with_grad, value_only).relative_error < 1e-4);
  }
}

TEST_CASE("objective decreases step by step on a fixed small dataset at LR 1e-4") {
  nnet::Rng rng(6);
  CausalModel model(3, tiny_config(3, 8), rng);
  std::vector<Matrix> windows;
  for (int b = 0; b < 16; ++b) windows.push_back(random_matrix(3, 3, rng));
  Matrix inputs;
  Matrix targets;
  split_windows(windows, inputs, targets);
  nnet::AdamConfig adam_cfg;
  adam_cfg.learning_rate = 1e-4;
  adam_cfg.warmup_epochs = 0.0;
  adam_cfg.total_epochs = 1e9;
  nnet::Adam adam(adam_cfg);
  double previous = model.objective_value(inputs, targets);
  for (int step = 0; step < 30; ++step) {
    nnet::Tape tape;
    nnet::Binding bound(tape, model.params());
    model.params().zero_grad();
    tape.backward(model.objective(bound, inputs, targets));
    adam.step(model.params(), 1.0);
    const double now = model.objective_value(inputs, targets);
    CHECK(now < previous);
    previous = now;
  }
}

TEST_CASE("AR(1) fit reaches the noise floor and keeps the self edge") {
  Matrix eps;
  data::LabeledSeries s = independent_ar1(2000, 1, 0.9, 1.0, 21, &eps);
  auto [train, val] = data::split_train_val(s, 0.2, 2);
  const data::WindowSet tw = data::make_windows(train, 2);
  const data::WindowSet vw = data::make_windows(val, 2);
  CausalConfig cfg = tiny_config(2, 32);
  cfg.epochs = 30;
  CausalTrainResult r = train_causal_discoverer(tw, cfg, &vw);

  // Closed-form least-squares fit of x_t on x_{t-1} as the oracle baseline.
  const Matrix& x = train.values;
  const Index n = x.rows() - 1;
  const Eigen::VectorXd prev = x.col(0).head(n);
  const Eigen::VectorXd next = x.col(0).tail(n);
  const double coef = prev.dot(next) / prev.dot(prev);
  const double ols_mse = (next - coef * prev).squaredNorm() / static_cast<double>(n);
  const double noise_var = eps.col(0).head(x.rows()).squaredNorm() / static_cast<double>(x.rows());
  CHECK(coef == doctest::Approx(0.9).epsilon(0.05));

  Matrix inputs;
  Matrix targets;
  split_windows(tw.all(), inputs, targets);
  const double mse = (r.model.forecast_flat(inputs) - targets).squaredNorm() / static_cast<double>(targets.size());
  CHECK(mse < 1.1 * noise_var);
  CHECK(mse < 1.1 * ols_mse);
  CHECK(r.model.gates()(0, 0) > 0.5);
  CHECK(r.log.size() == 30);
}

TEST_CASE("sparsity penalty pushes unused cross gates below self gates") {
  // Two independent AR(1) processes: only self edges carry information.
  data::LabeledSeries s = independent_ar1(2000, 2, 0.8, 1.0, 22);
  auto [train, val] = data::split_train_val(s, 0.2, 2);
  const data::WindowSet tw = data::make_windows(train, 2);
  const data::WindowSet vw = data::make_windows(val, 2);
  CausalConfig cfg = tiny_config(2, 16);
  cfg.epochs = 20;
  cfg.lambda_sparse = 0.0;
  const Matrix free_gates = train_causal_discoverer(tw, cfg, &vw).model.gates();
  cfg.lambda_sparse = 0.01;
  const Matrix sparse_gates = train_causal_discoverer(tw, cfg, &vw).model.gates();
  for (Index i = 0; i < 2; ++i) {
    const Index j = 1 - i;
    CHECK(sparse_gates(j, i) < sparse_gates(i, i));
    CHECK(sparse_gates(j, i) < free_gates(j, i));
  }
}

TEST_CASE("Lorenz96 N=10 gates rank true edges above non-edges") {
  synth::Lorenz96Config lc;
  lc.variables = 10;
  lc.length = 2000;
  lc.seed = 1;
  data::LabeledSeries s = synth::generate_lorenz96(lc);
  auto [train, val] = data::split_train_val(s, 0.2, 2);
  const data::NormStats st = data::fit_norm_stats(train);
  const data::WindowSet tw = data::make_windows(data::znormalize(train, st), 2);
  const data::WindowSet vw = data::make_windows(data::znormalize(val, st), 2);
  CausalConfig cfg;
  cfg.window = 2;
  CausalTrainResult r = train_causal_discoverer(tw, cfg, &vw);
  CHECK(pair_auroc(r.model.gates(), synth::lorenz96_ground_truth(10)) >= 0.85);
}

TEST_CASE("training is seeded, selects the best validation epoch and reports divergence") {
  nnet::Rng rng(7);
  data::LabeledSeries s = independent_ar1(300, 3, 0.5, 1.0, 23);
  const data::WindowSet tw = data::make_windows(s, 3);
  CausalConfig cfg = tiny_config(3, 4);
  cfg.epochs = 4;
  cfg.seed = 9;
  CausalTrainResult a = train_causal_discoverer(tw, cfg);
  CausalTrainResult b = train_causal_discoverer(tw, cfg);
  CHECK(a.model.gates() == b.model.gates());
  double best = a.log.front().val_loss;
  for (const auto& e : a.log) best = std::min(best, e.val_loss);
  CHECK(a.log[static_cast<std::size_t>(a.best_epoch)].val_loss == best);

  cfg.window = 4;
  CHECK_THROWS_AS(train_causal_discoverer(tw, cfg), ConfigError);

  data::LabeledSeries bad = s;
  bad.values(10, 1) = std::numeric_limits<double>::quiet_NaN();
  cfg.window = 3;
  try {
    train_causal_discoverer(data::make_windows(bad, 3), cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
  }
}

TEST_CASE("causal checkpoint round trip and report") {
  nnet::Rng rng(8);
  CausalModel model(3, tiny_config(3, 4), rng);
  model.params().at(CausalModel::kGateLogits).value = random_matrix(3, 3, rng);
  const auto path = std::filesystem::temp_directory_path() / "carots_causal_ck.json";
  save_causal_model(path, model);
  CausalModel back = load_causal_model(path);
  const Matrix h = random_matrix(2, 3, rng);
  CHECK(back.forecast(h) == model.forecast(h));
  CHECK(back.window() == 3);
  CHECK(back.lambda_sparse() == model.lambda_sparse());
  CHECK(back.weight_ridge() == model.weight_ridge());

  const auto report = causality_report(model, {"a", "b", "c"});
  const CausalityMatrix m = model.matrix();
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      CHECK(report["binary"][i][j].get<int>() == static_cast<int>(m.binary()(i, j)));
      CHECK(report["gates"][i][j].get<double>() == m.gates()(i, j));
    }
  }
  CHECK(report["parents"]["a"].size() == m.parents(0).size());
}
