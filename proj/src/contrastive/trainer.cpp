#include "carots/contrastive/trainer.hpp"

#include "carots/dataio/series.hpp"
#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace carots::contrastive {

namespace {

struct PreparedBatch {
  augment::AugmentedBatch batch;
  Index originals = 0;
};

std::vector<PreparedBatch> fixed_batches(const data::WindowSet& ws, const causal::CausalModel& causal,
                                         const causal::CausalityMatrix& matrix,
                                         const ContrastiveConfig& cfg, nnet::Rng& rng) {
  std::vector<PreparedBatch> out;
  std::vector<Index> idx(static_cast<std::size_t>(ws.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index begin = 0; begin < ws.size(); begin += cfg.batch_size) {
    const Index count = std::min(cfg.batch_size, ws.size() - begin);
    auto originals = ws.gather(std::span<const Index>(idx.data() + begin, static_cast<std::size_t>(count)));
    out.push_back({augment::build_batch(originals, causal, matrix, cfg.cpa, cfg.cda, rng), count});
  }
  return out;
}

}  // namespace

EncoderTrainResult train_encoder(const data::WindowSet& train, const causal::CausalModel& causal,
                                 const ContrastiveConfig& cfg, const data::WindowSet* val) {
  cfg.soc.validate();
  cfg.encoder.validate();
  cfg.cda.validate();
  cfg.cpa.validate(causal.variables());
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (train.size() < 1) throw ConfigError("no training windows for the encoder");
  if (train.width() != causal.window() || train.variables() != causal.variables()) {
    throw ConfigError("training windows do not match the causal model (window " +
                      std::to_string(causal.window()) + ", " + std::to_string(causal.variables()) +
                      " variables)");
  }
  if (val != nullptr && (val->width() != train.width() || val->variables() != train.variables())) {
    throw ConfigError("validation windows do not match the training windows");
  }

  nnet::Rng rng(cfg.seed);
  EncoderTrainResult result;
  EncoderModel model(train.width(), train.variables(), cfg.encoder, rng);
  const causal::CausalityMatrix matrix = causal.matrix();
  nnet::AdamConfig adam_cfg = cfg.adam;
  adam_cfg.total_epochs = static_cast<double>(cfg.soc.epochs);
  nnet::Adam adam(adam_cfg);

  const double tau = cfg.soc.temperature;
  const double val_alpha = cfg.soc.fixed_alpha ? *cfg.soc.fixed_alpha : cfg.soc.alpha_end;
  std::vector<PreparedBatch> val_batches;
  if (val != nullptr && val->size() > 0) {
    nnet::Rng val_rng(cfg.seed ^ 0x5bd1e995ULL);
    val_batches = fixed_batches(*val, causal, matrix, cfg, val_rng);
  }

  std::vector<Index> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const Index batches = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  double best = std::numeric_limits<double>::infinity();
  nnet::ParamSet best_params = model.params();

  for (Index epoch = 0; epoch < cfg.soc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EncoderEpochLog entry;
    entry.epoch = epoch;
    entry.alpha = alpha_at(cfg.soc, epoch);
    double loss_sum = 0.0;
    double ratio_sum = 0.0;
    for (Index b = 0; b < batches; ++b) {
      const Index begin = b * cfg.batch_size;
      const Index count = std::min(cfg.batch_size, train.size() - begin);
      auto originals = train.gather(std::span<const Index>(order.data() + begin, static_cast<std::size_t>(count)));
      augment::AugmentedBatch batch =
          augment::build_batch(originals, causal, matrix, cfg.cpa, cfg.cda, rng);

      nnet::Tape tape;
      nnet::Binding bound(tape, model.params());
      nnet::Var emb = model.embed(bound, batch.samples);
      nnet::Var loss = soc_loss(emb, entry.alpha, tau, cfg.soc.include_self);
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw NumericalError("contrastive loss diverged at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(b));
      }
      ratio_sum += unfiltered_ratio(emb.value(), entry.alpha, tau, cfg.soc.include_self) * static_cast<double>(count);
      model.params().zero_grad();
      tape.backward(loss);
      const double progress = static_cast<double>(epoch) + static_cast<double>(b + 1) / static_cast<double>(batches);
      entry.learning_rate = adam.step(model.params(), progress).learning_rate;
      loss_sum += value * static_cast<double>(count);
    }
    entry.loss = loss_sum / static_cast<double>(train.size());
    entry.unfiltered_ratio = ratio_sum / static_cast<double>(train.size());

    if (!val_batches.empty()) {
      double total = 0.0;
      Index n = 0;
      for (const PreparedBatch& vb : val_batches) {
        const Matrix e = model.encode_batch(vb.batch.samples);
        total += evaluate_soc(scaled_similarity(e, tau), val_alpha, tau, cfg.soc.include_self).loss *
                 static_cast<double>(vb.originals);
        n += vb.originals;
      }
      entry.val_loss = total / static_cast<double>(n);
    } else {
      entry.val_loss = entry.loss;
    }
    if (!std::isfinite(entry.val_loss)) {
      throw NumericalError("contrastive validation loss diverged at epoch " + std::to_string(epoch));
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

void write_training_log(std::ostream& out, const std::vector<EncoderEpochLog>& log) {
  out << "epoch,loss,val_loss,alpha,unfiltered_ratio,learning_rate\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << data::format_double(e.loss) << ',' << data::format_double(e.val_loss) << ','
        << data::format_double(e.alpha) << ',' << data::format_double(e.unfiltered_ratio) << ','
        << data::format_double(e.learning_rate) << '\n';
  }
}

}  // namespace carots::contrastive
