#pragma once

#include "carots/augment/augment.hpp"
#include "carots/contrastive/encoder.hpp"
#include "carots/contrastive/soc.hpp"
#include "carots/dataio/series.hpp"

#include <iosfwd>
#include <vector>

namespace carots::contrastive {

struct ContrastiveConfig {
  EncoderConfig encoder;
  SocConfig soc;
  augment::CpaConfig cpa;
  augment::CdaConfig cda;
  nnet::AdamConfig adam;
  Index batch_size = 256;
  std::uint64_t seed = 0;
};

struct EncoderEpochLog {
  Index epoch = 0;
  double loss = 0.0;
  double val_loss = 0.0;
  double alpha = 0.0;
  double unfiltered_ratio = 0.0;
  double learning_rate = 0.0;
};

struct EncoderTrainResult {
  EncoderModel model;
  std::vector<EncoderEpochLog> log;
  Index best_epoch = 0;
};

/// Per epoch: shuffle, build a 4B augmented batch per mini-batch, minimize the
/// SOC loss at alpha_at(epoch). Validation batches are built once from a fixed
/// RNG and scored at the final threshold, so epochs are compared on the same
/// footing; the epoch with the lowest validation loss is returned (training
/// loss when no validation windows are given).
/// Throws NumericalError on a non-finite loss.
EncoderTrainResult train_encoder(const data::WindowSet& train, const causal::CausalModel& causal,
                                 const ContrastiveConfig& cfg, const data::WindowSet* val = nullptr);

/// CSV with columns epoch,loss,val_loss,alpha,unfiltered_ratio,learning_rate.
void write_training_log(std::ostream& out, const std::vector<EncoderEpochLog>& log);

}  // namespace carots::contrastive
