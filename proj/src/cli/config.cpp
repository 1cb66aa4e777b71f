#include "carots/cli/config.hpp"

#include "carots/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace carots::cli {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config section '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + name(key) + "': " + e.what());
    }
  }

  void read_optional(const std::string& key, std::optional<double>& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    read(key, v);
    out = v;
  }

  template <typename F>
  void read_string(const std::string& key, F&& parse) {
    std::string s;
    read(key, s);
    if (!j_.contains(key)) return;
    try {
      parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError("config key '" + name(key) + "': " + e.what());
    }
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (used_.count(item.key()) == 0) throw ConfigError("unknown config key '" + name(item.key()) + "'");
    }
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string source_name(DataSource s) { return s == DataSource::csv ? "csv" : "synthetic"; }

DataSource parse_source(const std::string& s) {
  if (s == "synthetic") return DataSource::synthetic;
  if (s == "csv") return DataSource::csv;
  throw ConfigError("unknown data source '" + s + "' (expected synthetic or csv)");
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.resolve();
  return cfg;
}

void ExperimentConfig::resolve() {
  if (window == 0) {
    if (data.source == DataSource::csv) window = 10;
    else window = data.system == synth::SystemKind::var ? 4 : 2;
  }
  if (distance == "auto") {
    distance = data.source == DataSource::synthetic && data.system == synth::SystemKind::var ? "cosine" : "l2";
  }
  causal.window = window;
}

scoring::Distance ExperimentConfig::resolved_distance() const {
  if (distance == "auto") throw ConfigError("distance is unresolved");
  return scoring::parse_distance(distance);
}

void ExperimentConfig::validate() const {
  if (window < 2) throw ConfigError("window must be at least 2");
  causal.validate();
  contrastive.soc.validate();
  contrastive.encoder.validate();
  contrastive.cda.validate();
  if (contrastive.batch_size < 1) throw ConfigError("contrastive batch size must be positive");
  if (!(contrastive.adam.learning_rate > 0.0)) throw ConfigError("contrastive learning rate must be positive");
  if (contrastive.cpa.causes < 1 || !(contrastive.cpa.noise_std >= 0.0)) {
    throw ConfigError("CPA needs at least one cause and a non-negative noise std");
  }
  (void)resolved_distance();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (sweep_learning_rates.empty() || sweep_weight_decays.empty()) throw ConfigError("sweep grid is empty");
  for (double f : difficulty_factors) {
    if (!(f > 0.0)) throw ConfigError("difficulty factors must be positive");
  }
  if (data.source == DataSource::synthetic) {
    if (data.variables < 1 || data.length < 1) throw ConfigError("synthetic series needs variables and length");
    if (!(data.train_fraction > 0.0 && data.val_fraction > 0.0 && data.train_fraction + data.val_fraction < 1.0)) {
      throw ConfigError("train and validation fractions must be positive and sum below 1");
    }
    if (contrastive.cpa.causes >= data.variables) throw ConfigError("CPA causes must be fewer than the variables");
  } else {
    if (data.train_values.empty() || data.test_values.empty() || data.test_labels.empty()) {
      throw ConfigError("csv data needs train_values, test_values and test_labels");
    }
    if (!(data.csv_val_fraction > 0.0 && data.csv_val_fraction < 1.0)) {
      throw ConfigError("csv validation fraction must lie in (0, 1)");
    }
    if (data.downsample < 1) throw ConfigError("downsample factor must be positive");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Section root(j, "");

  Section d = root.sub("data");
  d.read_string("source", [&](const std::string& s) { cfg.data.source = parse_source(s); });
  d.read_string("system", [&](const std::string& s) { cfg.data.system = synth::parse_system_kind(s); });
  d.read("variables", cfg.data.variables);
  d.read("length", cfg.data.length);
  d.read("train_fraction", cfg.data.train_fraction);
  d.read("val_fraction", cfg.data.val_fraction);
  d.read("forcing", cfg.data.forcing);
  d.read("dt", cfg.data.dt);
  d.read("var_lag", cfg.data.var_lag);
  d.read("var_density", cfg.data.var_density);
  d.read("var_noise_std", cfg.data.var_noise_std);
  Section an = d.sub("anomaly");
  an.read("ratio", cfg.data.anomaly_ratio);
  an.read("affected_variables", cfg.data.affected_variables);
  an.read("factor", cfg.data.anomaly_factor);
  an.read("radius", cfg.data.anomaly_radius);
  an.read("cg_amplitude", cfg.data.cg_amplitude);
  an.read("cg_frequency", cfg.data.cg_frequency);
  an.read("cg_harmonics", cfg.data.cg_harmonics);
  an.finish();
  Section csv = d.sub("csv");
  csv.read("train_values", cfg.data.train_values);
  csv.read("test_values", cfg.data.test_values);
  csv.read("test_labels", cfg.data.test_labels);
  csv.read("val_fraction", cfg.data.csv_val_fraction);
  csv.read("downsample", cfg.data.downsample);
  csv.finish();
  d.finish();

  root.read("window", cfg.window);

  Section c = root.sub("causal");
  c.read("hidden", cfg.causal.hidden);
  c.read("lambda_sparse", cfg.causal.lambda_sparse);
  c.read("weight_ridge", cfg.causal.weight_ridge);
  c.read("gate_threshold", cfg.causal.gate_threshold);
  c.read("gate_init", cfg.causal.gate_init);
  c.read("epochs", cfg.causal.epochs);
  c.read("batch_size", cfg.causal.batch_size);
  c.read("learning_rate", cfg.causal.adam.learning_rate);
  c.read("weight_decay", cfg.causal.adam.weight_decay);
  c.read("warmup_epochs", cfg.causal.adam.warmup_epochs);
  c.finish();

  Section e = root.sub("encoder");
  e.read_string("architecture", [&](const std::string& s) { cfg.contrastive.encoder.kind = contrastive::parse_encoder_kind(s); });
  e.read("hidden", cfg.contrastive.encoder.hidden);
  e.read("embedding", cfg.contrastive.encoder.embedding);
  e.read("normalize", cfg.contrastive.encoder.normalize);
  e.finish();

  Section t = root.sub("contrastive");
  t.read("batch_size", cfg.contrastive.batch_size);
  t.read("epochs", cfg.contrastive.soc.epochs);
  t.read("temperature", cfg.contrastive.soc.temperature);
  t.read("alpha_start", cfg.contrastive.soc.alpha_start);
  t.read("alpha_end", cfg.contrastive.soc.alpha_end);
  t.read_optional("fixed_alpha", cfg.contrastive.soc.fixed_alpha);
  t.read("include_self", cfg.contrastive.soc.include_self);
  t.read("learning_rate", cfg.contrastive.adam.learning_rate);
  t.read("weight_decay", cfg.contrastive.adam.weight_decay);
  t.read("warmup_epochs", cfg.contrastive.adam.warmup_epochs);
  t.finish();

  Section a = root.sub("augment");
  a.read("cpa_causes", cfg.contrastive.cpa.causes);
  a.read("cpa_noise_std", cfg.contrastive.cpa.noise_std);
  a.read("cda_cutoff", cfg.contrastive.cda.cutoff);
  a.read("cda_palette", cfg.contrastive.cda.palette);
  a.read("cda_timestep_fraction", cfg.contrastive.cda.timestep_fraction);
  a.finish();

  Section s = root.sub("scoring");
  s.read("distance", cfg.distance);
  if (cfg.distance != "auto") (void)scoring::parse_distance(cfg.distance);
  s.read_string("mode", [&](const std::string& m) { cfg.score_mode = scoring::parse_score_mode(m); });
  s.finish();

  root.read("seeds", cfg.seeds);
  Section sw = root.sub("sweep");
  sw.read("learning_rates", cfg.sweep_learning_rates);
  sw.read("weight_decays", cfg.sweep_weight_decays);
  sw.read("difficulty_factors", cfg.difficulty_factors);
  sw.finish();
  root.read("output", cfg.output);
  root.finish();

  cfg.resolve();
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& d = cfg.data;
  const auto& c = cfg.causal;
  const auto& k = cfg.contrastive;
  return {
      {"data",
       {{"source", source_name(d.source)},
        {"system", synth::to_string(d.system)},
        {"variables", d.variables},
        {"length", d.length},
        {"train_fraction", d.train_fraction},
        {"val_fraction", d.val_fraction},
        {"forcing", d.forcing},
        {"dt", d.dt},
        {"var_lag", d.var_lag},
        {"var_density", d.var_density},
        {"var_noise_std", d.var_noise_std},
        {"anomaly",
         {{"ratio", d.anomaly_ratio},
          {"affected_variables", d.affected_variables},
          {"factor", d.anomaly_factor},
          {"radius", d.anomaly_radius},
          {"cg_amplitude", d.cg_amplitude},
          {"cg_frequency", d.cg_frequency},
          {"cg_harmonics", d.cg_harmonics}}},
        {"csv",
         {{"train_values", d.train_values},
          {"test_values", d.test_values},
          {"test_labels", d.test_labels},
          {"val_fraction", d.csv_val_fraction},
          {"downsample", d.downsample}}}}},
      {"window", cfg.window},
      {"causal",
       {{"hidden", c.hidden},
        {"lambda_sparse", c.lambda_sparse},
        {"weight_ridge", c.weight_ridge},
        {"gate_threshold", c.gate_threshold},
        {"gate_init", c.gate_init},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"learning_rate", c.adam.learning_rate},
        {"weight_decay", c.adam.weight_decay},
        {"warmup_epochs", c.adam.warmup_epochs}}},
      {"encoder",
       {{"architecture", contrastive::to_string(k.encoder.kind)},
        {"hidden", k.encoder.hidden},
        {"embedding", k.encoder.embedding},
        {"normalize", k.encoder.normalize}}},
      {"contrastive",
       {{"batch_size", k.batch_size},
        {"epochs", k.soc.epochs},
        {"temperature", k.soc.temperature},
        {"alpha_start", k.soc.alpha_start},
        {"alpha_end", k.soc.alpha_end},
        {"fixed_alpha", k.soc.fixed_alpha ? json(*k.soc.fixed_alpha) : json(nullptr)},
        {"include_self", k.soc.include_self},
        {"learning_rate", k.adam.learning_rate},
        {"weight_decay", k.adam.weight_decay},
        {"warmup_epochs", k.adam.warmup_epochs}}},
      {"augment",
       {{"cpa_causes", k.cpa.causes},
        {"cpa_noise_std", k.cpa.noise_std},
        {"cda_cutoff", k.cda.cutoff},
        {"cda_palette", k.cda.palette},
        {"cda_timestep_fraction", k.cda.timestep_fraction}}},
      {"scoring", {{"distance", cfg.distance}, {"mode", scoring::to_string(cfg.score_mode)}}},
      {"seeds", cfg.seeds},
      {"sweep",
       {{"learning_rates", cfg.sweep_learning_rates},
        {"weight_decays", cfg.sweep_weight_decays},
        {"difficulty_factors", cfg.difficulty_factors}}},
      {"output", cfg.output},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hash_sections(const ExperimentConfig& cfg, std::initializer_list<const char*> keys) {
  const json full = to_json(cfg);
  json hashed = json::object();
  for (const char* key : keys) hashed[key] = full.at(key);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(hashed.dump())));
  return buf;
}

}  // namespace

std::string config_hash(const ExperimentConfig& cfg) {
  return hash_sections(cfg, {"data", "window", "causal", "encoder", "contrastive", "augment"});
}

std::string stage_hash(const ExperimentConfig& cfg, const std::string& stage) {
  if (stage == "gen") return hash_sections(cfg, {"data"});
  if (stage == "discover") return hash_sections(cfg, {"data", "window", "causal"});
  return config_hash(cfg);
}

}  // namespace carots::cli
