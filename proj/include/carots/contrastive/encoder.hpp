#pragma once

#include "carots/nnet/tape.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace carots::contrastive {

using nnet::Index;
using nnet::Matrix;
using nnet::Vector;

enum class EncoderKind { gru, mlp };

std::string to_string(EncoderKind k);
EncoderKind parse_encoder_kind(const std::string& s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::gru;
  Index hidden = 64;
  Index embedding = 32;
  /// Unit-normalize embeddings.
  bool normalize = true;

  void validate() const;
};

/// GRU (or one-hidden-layer tanh MLP over the flattened window) followed by a
/// linear projection to the embedding dimension.
class EncoderModel {
 public:
  EncoderModel() = default;
  EncoderModel(Index window, Index variables, const EncoderConfig& cfg, nnet::Rng& rng);
  EncoderModel(nnet::ParamSet params, Index window, Index variables, const EncoderConfig& cfg);

  Index window() const { return window_; }
  Index variables() const { return variables_; }
  const EncoderConfig& config() const { return cfg_; }
  const nnet::ParamSet& params() const { return params_; }
  nnet::ParamSet& params() { return params_; }

  /// Embeddings of a batch of windows (B x D) recorded on the bound tape.
  nnet::Var embed(nnet::Binding& bound, const std::vector<Matrix>& windows) const;
  /// Tape-free batch embedding.
  Matrix encode_batch(const std::vector<Matrix>& windows) const;
  Vector encode(const Matrix& window) const;

 private:
  nnet::ParamSet params_;
  EncoderConfig cfg_;
  Index window_ = 0;
  Index variables_ = 0;
};

void save_encoder(const std::filesystem::path& path, const EncoderModel& model);
EncoderModel load_encoder(const std::filesystem::path& path);

}  // namespace carots::contrastive
