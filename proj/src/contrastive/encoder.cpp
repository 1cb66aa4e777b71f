#include "carots/contrastive/encoder.hpp"

#include "carots/error.hpp"
#include "carots/nnet/checkpoint.hpp"
#include "carots/nnet/layers.hpp"

namespace carots::contrastive {

std::string to_string(EncoderKind k) { return k == EncoderKind::gru ? "gru" : "mlp"; }

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "gru") return EncoderKind::gru;
  if (s == "mlp") return EncoderKind::mlp;
  throw ConfigError("unknown encoder '" + s + "' (expected gru or mlp)");
}

void EncoderConfig::validate() const {
  if (hidden < 1) throw ConfigError("encoder hidden size must be positive");
  if (embedding < 1) throw ConfigError("embedding dimension must be positive");
}

EncoderModel::EncoderModel(Index window, Index variables, const EncoderConfig& cfg, nnet::Rng& rng)
    : cfg_(cfg), window_(window), variables_(variables) {
  cfg_.validate();
  if (window < 1 || variables < 1) throw ConfigError("encoder needs a positive window and variable count");
  if (cfg_.kind == EncoderKind::gru) {
    nnet::add_gru(params_, "gru", variables, cfg_.hidden, rng);
  } else {
    nnet::add_linear(params_, "mlp", window * variables, cfg_.hidden, rng);
  }
  nnet::add_linear(params_, "proj", cfg_.hidden, cfg_.embedding, rng);
}

EncoderModel::EncoderModel(nnet::ParamSet params, Index window, Index variables, const EncoderConfig& cfg)
    : params_(std::move(params)), cfg_(cfg), window_(window), variables_(variables) {
  cfg_.validate();
  const Matrix& proj = params_.at("proj.w").value;
  if (proj.rows() != cfg_.hidden || proj.cols() != cfg_.embedding) {
    throw ShapeError("encoder projection does not match the configured sizes");
  }
  if (cfg_.kind == EncoderKind::gru) {
    if (nnet::gru_input_size(params_, "gru") != variables_ || nnet::gru_hidden_size(params_, "gru") != cfg_.hidden) {
      throw ShapeError("encoder GRU does not match the configured sizes");
    }
  } else if (params_.at("mlp.w").value.rows() != window_ * variables_) {
    throw ShapeError("encoder MLP does not match the window shape");
  }
}

nnet::Var EncoderModel::embed(nnet::Binding& bound, const std::vector<Matrix>& windows) const {
  if (windows.empty()) throw ShapeError("encoder needs at least one window");
  for (const Matrix& w : windows) {
    if (w.rows() != window_ || w.cols() != variables_) {
      throw ShapeError("encoder expects " + std::to_string(window_) + "x" + std::to_string(variables_) +
                       " windows, got " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
  }
  nnet::Var h;
  if (cfg_.kind == EncoderKind::gru) {
    h = nnet::gru_sequence(bound, "gru", nnet::time_major(windows));
  } else {
    Matrix flat(static_cast<Index>(windows.size()), window_ * variables_);
    for (std::size_t b = 0; b < windows.size(); ++b) {
      for (Index t = 0; t < window_; ++t) flat.block(static_cast<Index>(b), t * variables_, 1, variables_) = windows[b].row(t);
    }
    h = nnet::tanh(nnet::linear(bound, "mlp", bound.tape().constant(std::move(flat))));
  }
  nnet::Var e = nnet::linear(bound, "proj", h);
  return cfg_.normalize ? nnet::normalize_rows(e) : e;
}

Matrix EncoderModel::encode_batch(const std::vector<Matrix>& windows) const {
  nnet::Tape tape;
  nnet::Binding bound(tape, params_);
  return embed(bound, windows).value();
}

Vector EncoderModel::encode(const Matrix& window) const {
  return encode_batch({window}).row(0).transpose();
}

void save_encoder(const std::filesystem::path& path, const EncoderModel& model) {
  const EncoderConfig& c = model.config();
  nlohmann::json meta = {{"kind", "encoder"},
                         {"architecture", to_string(c.kind)},
                         {"hidden", c.hidden},
                         {"embedding", c.embedding},
                         {"normalize", c.normalize},
                         {"window", model.window()},
                         {"variables", model.variables()}};
  nnet::save_checkpoint(path, model.params(), meta);
}

EncoderModel load_encoder(const std::filesystem::path& path) {
  nnet::Checkpoint ck = nnet::load_checkpoint(path);
  if (ck.meta.value("kind", "") != "encoder") throw ParseError(path.string() + " is not an encoder checkpoint");
  EncoderConfig c;
  c.kind = parse_encoder_kind(ck.meta.at("architecture").get<std::string>());
  c.hidden = ck.meta.at("hidden").get<Index>();
  c.embedding = ck.meta.at("embedding").get<Index>();
  c.normalize = ck.meta.at("normalize").get<bool>();
  return EncoderModel(std::move(ck.params), ck.meta.at("window").get<Index>(),
                      ck.meta.at("variables").get<Index>(), c);
}

}  // namespace carots::contrastive
