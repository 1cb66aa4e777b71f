#include "carots/cli/pipeline.hpp"

#include "carots/augment/augment.hpp"
#include "carots/error.hpp"
#include "carots/eval/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>

namespace carots::cli {

using nlohmann::json;

namespace {

// Stream seeds derived from the run seed, one per consumer.
constexpr std::uint64_t kCentroidStream = 0x63656e74ULL;
constexpr std::uint64_t kAugmentStream = 0x61756774ULL;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 ? static_cast<Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j.at(static_cast<std::size_t>(i)).size()) != cols) throw ParseError("ragged matrix in JSON");
    for (Index j2 = 0; j2 < cols; ++j2) m(i, j2) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j2)).get<double>();
  }
  return m;
}

json row_json(const data::RowVector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

data::RowVector row_from_json(const json& j) {
  data::RowVector v(static_cast<Index>(j.size()));
  for (Index k = 0; k < v.size(); ++k) v(k) = j.at(static_cast<std::size_t>(k)).get<double>();
  return v;
}

std::string values_file(const std::string& name) { return name + ".csv"; }
std::string labels_file(const std::string& name) { return name + ".labels.csv"; }

synth::BenchmarkConfig benchmark_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  const DataConfig& d = cfg.data;
  synth::BenchmarkConfig bc;
  bc.system = d.system;
  bc.train_fraction = d.train_fraction;
  bc.val_fraction = d.val_fraction;
  bc.lorenz.variables = d.variables;
  bc.lorenz.length = d.length;
  bc.lorenz.forcing = d.forcing;
  bc.lorenz.dt = d.dt;
  bc.lorenz.seed = seed;
  bc.var.variables = d.variables;
  bc.var.length = d.length;
  bc.var.lag = d.var_lag;
  bc.var.density = d.var_density;
  bc.var.noise_std = d.var_noise_std;
  bc.var.seed = seed;
  bc.anomalies = synth::default_anomaly_specs(seed, d.anomaly_factor);
  for (synth::AnomalySpec& s : bc.anomalies) {
    s.anomaly_ratio = d.anomaly_ratio;
    s.affected_count = d.affected_variables;
    s.radius = d.anomaly_radius;
    s.cg_amplitude = d.cg_amplitude;
    s.cg_frequency = d.cg_frequency;
    s.cg_harmonics = d.cg_harmonics;
  }
  return bc;
}

void log_line(const std::string& msg) {
  std::fprintf(stderr, "%s\n", msg.c_str());
}

data::WindowSet normalized_windows(const data::LabeledSeries& s, const data::NormStats& st, Index w) {
  return data::make_windows(data::znormalize(s, st), w);
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty list");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

// ---- Files and manifests -----------------------------------------------------

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

fs::path output_root(const ExperimentConfig& cfg, const std::optional<fs::path>& override_dir) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
  return "carots-out";
}

void write_manifest(const fs::path& dir, const std::string& stage, const ExperimentConfig& cfg,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& files, const json& extra,
                    const std::string& name) {
  json m = {{"format", "carots-manifest/1"},
            {"stage", stage},
            {"config_hash", config_hash(cfg)},
            {"stage_hash", stage_hash(cfg, stage)},
            {"seed", seed ? json(*seed) : json(nullptr)},
            {"files", files},
            {"config", to_json(cfg)}};
  for (const auto& item : extra.items()) m[item.key()] = item.value();
  write_json(dir / name, m);
}

json read_manifest(const fs::path& dir, const std::string& stage, const ExperimentConfig& cfg) {
  const fs::path path = dir / kManifestFile;
  if (!fs::exists(path)) {
    throw ConfigError("no " + stage + " output in " + dir.string() + "; run `carots " + stage + "` first");
  }
  json m = read_json(path);
  if (m.value("stage", "") != stage) throw ConfigError(path.string() + " is not a " + stage + " manifest");
  const std::string want = stage_hash(cfg, stage);
  const std::string have = m.value("stage_hash", "");
  if (have != want) {
    throw ConfigError(dir.string() + " was produced with " + stage + " hash " + have +
                      " but the current config gives " + want + "; refusing to mix artifacts");
  }
  return m;
}

// ---- Data ----------------------------------------------------------------------

data::WindowSet Dataset::train_windows(Index w) const { return normalized_windows(train, stats, w); }
data::WindowSet Dataset::val_windows(Index w) const { return normalized_windows(val, stats, w); }

void cmd_gen(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const fs::path dir = layout.data_dir(seed);
  ensure_dir(dir);
  std::vector<std::string> files;
  json extra = json::object();
  data::LabeledSeries train;
  data::LabeledSeries val;
  std::vector<TestSplit> tests;

  if (cfg.data.source == DataSource::synthetic) {
    const synth::Benchmark b = synth::build_synthetic_benchmark(benchmark_config(cfg, seed));
    train = b.train;
    val = b.val;
    data::write_csv(b.test_clean, dir / values_file("test_clean"));
    files.push_back(values_file("test_clean"));
    json variants = json::array();
    for (const synth::TestVariant& v : b.variants) {
      tests.push_back({synth::to_string(v.kind), v.injection.series});
      variants.push_back({{"name", synth::to_string(v.kind)},
                          {"events", v.injection.event_times},
                          {"variables", v.injection.variables},
                          {"anomalous_steps", v.injection.series.anomaly_count()}});
    }
    write_json(dir / "ground_truth.json", matrix_json(b.ground_truth));
    files.push_back("ground_truth.json");
    extra["variants"] = variants;
  } else {
    data::LabeledSeries full = data::load_csv(cfg.data.train_values);
    data::LabeledSeries test = data::load_csv(cfg.data.test_values, fs::path(cfg.data.test_labels));
    if (cfg.data.downsample > 1) {
      full = data::downsample(full, cfg.data.downsample);
      test = data::downsample(test, cfg.data.downsample);
    }
    if (test.variables() != full.variables()) throw ConfigError("train and test CSV files have different variables");
    std::tie(train, val) = data::split_train_val(full, cfg.data.csv_val_fraction, cfg.window);
    tests.push_back({"test", test});
  }

  data::write_csv(train, dir / values_file("train"));
  data::write_csv(val, dir / values_file("val"));
  files.push_back(values_file("train"));
  files.push_back(values_file("val"));
  json names = json::array();
  for (const TestSplit& t : tests) {
    const std::string base = "test_" + t.name;
    data::write_csv(t.series, dir / values_file(base), dir / labels_file(base));
    files.push_back(values_file(base));
    files.push_back(labels_file(base));
    names.push_back(t.name);
  }
  const data::NormStats st = data::fit_norm_stats(train);
  write_json(dir / "norm.json", {{"mean", row_json(st.mean)}, {"std", row_json(st.std)}});
  files.push_back("norm.json");
  extra["tests"] = names;
  extra["lengths"] = {{"train", train.length()}, {"val", val.length()}};
  write_manifest(dir, "gen", cfg, seed, files, extra);
  log_line("gen: seed " + std::to_string(seed) + " -> " + dir.string());
}

Dataset load_dataset(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const fs::path dir = layout.data_dir(seed);
  const json m = read_manifest(dir, "gen", cfg);
  Dataset d;
  d.train = data::load_csv(dir / values_file("train"));
  d.val = data::load_csv(dir / values_file("val"));
  const json norm = read_json(dir / "norm.json");
  d.stats.mean = row_from_json(norm.at("mean"));
  d.stats.std = row_from_json(norm.at("std"));
  for (const auto& name : m.at("tests")) {
    const std::string base = "test_" + name.get<std::string>();
    d.tests.push_back({name.get<std::string>(), data::load_csv(dir / values_file(base), dir / labels_file(base))});
  }
  if (fs::exists(dir / values_file("test_clean"))) d.test_clean = data::load_csv(dir / values_file("test_clean"));
  return d;
}

// ---- Causal discovery ---------------------------------------------------------

void cmd_discover(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const Dataset d = load_dataset(cfg, layout, seed);
  causal::CausalConfig cc = cfg.causal;
  cc.seed = seed;
  const data::WindowSet tw = d.train_windows(cfg.window);
  const data::WindowSet vw = d.val_windows(cfg.window);
  const causal::CausalTrainResult r = causal::train_causal_discoverer(tw, cc, &vw);

  const fs::path dir = layout.causal_dir(seed);
  ensure_dir(dir);
  causal::save_causal_model(dir / "model.json", r.model);
  json report = causal::causality_report(r.model, d.train.names);
  const fs::path truth = layout.data_dir(seed) / "ground_truth.json";
  if (fs::exists(truth)) {
    const Matrix gt = matrix_from_json(read_json(truth));
    const Matrix g = r.model.gates();
    std::vector<double> scores;
    data::Labels labels;
    for (Index i = 0; i < gt.rows(); ++i) {
      for (Index j = 0; j < gt.cols(); ++j) {
        scores.push_back(g(i, j));
        labels.push_back(gt(i, j) != 0.0 ? 1 : 0);
      }
    }
    const Matrix bin = r.model.matrix().binary();
    report["edge_auroc"] = eval::auroc(scores, labels);
    report["binary_accuracy"] = ((bin - gt).array().abs() < 0.5).cast<double>().mean();
  }
  write_json(dir / "report.json", report);
  {
    std::ofstream log = open_out(dir / "log.csv");
    log << "epoch,train_loss,val_loss,learning_rate\n";
    for (const auto& e : r.log) {
      log << e.epoch << ',' << data::format_double(e.train_loss) << ',' << data::format_double(e.val_loss) << ','
          << data::format_double(e.learning_rate) << '\n';
    }
  }
  write_manifest(dir, "discover", cfg, seed, {"model.json", "report.json", "log.csv"},
                 {{"best_epoch", r.best_epoch}});
  log_line("discover: seed " + std::to_string(seed) + " best epoch " + std::to_string(r.best_epoch));
}

// ---- Encoder -----------------------------------------------------------------------

namespace {

causal::CausalModel load_causal(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const fs::path dir = layout.causal_dir(seed);
  (void)read_manifest(dir, "discover", cfg);
  return causal::load_causal_model(dir / "model.json");
}

contrastive::ContrastiveConfig contrastive_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  contrastive::ContrastiveConfig c = cfg.contrastive;
  c.seed = seed;
  return c;
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const causal::CausalModel causal = load_causal(cfg, layout, seed);
  const Dataset d = load_dataset(cfg, layout, seed);
  const data::WindowSet tw = d.train_windows(cfg.window);
  const data::WindowSet vw = d.val_windows(cfg.window);
  const contrastive::EncoderTrainResult r = contrastive::train_encoder(tw, causal, contrastive_config(cfg, seed), &vw);

  const fs::path dir = layout.encoder_dir(seed);
  ensure_dir(dir);
  contrastive::save_encoder(dir / "model.json", r.model);
  {
    std::ofstream log = open_out(dir / "log.csv");
    contrastive::write_training_log(log, r.log);
  }
  write_manifest(dir, "train", cfg, seed, {"model.json", "log.csv"},
                 {{"best_epoch", r.best_epoch},
                  {"unfiltered_ratio_first", r.log.front().unfiltered_ratio},
                  {"unfiltered_ratio_last", r.log.back().unfiltered_ratio}});
  log_line("train: seed " + std::to_string(seed) + " best epoch " + std::to_string(r.best_epoch));
}

// ---- Augmentation preview -----------------------------------------------------

void cmd_augment(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed, Index preview) {
  if (preview < 0) throw ConfigError("preview count must be non-negative");
  const causal::CausalModel causal = load_causal(cfg, layout, seed);
  const Dataset d = load_dataset(cfg, layout, seed);
  const data::WindowSet tw = d.train_windows(cfg.window);
  const causal::CausalityMatrix matrix = causal.matrix();
  const auto& c = cfg.contrastive;

  // CDA validity: forecast error of every training window before and after disturbance.
  nnet::Rng rng(seed ^ kAugmentStream);
  std::vector<double> original;
  std::vector<double> disturbed;
  for (Index k = 0; k < tw.size(); ++k) {
    const Matrix w = tw.window(k);
    original.push_back(scoring::score_cd(causal, w));
    disturbed.push_back(scoring::score_cd(causal, augment::cda(w, matrix, c.cda, rng)));
  }

  json samples = json::array();
  const Index k_count = std::min(preview, tw.size());
  if (k_count > 0) {
    std::vector<Index> idx(static_cast<std::size_t>(k_count));
    for (Index k = 0; k < k_count; ++k) idx[static_cast<std::size_t>(k)] = k;
    augment::BatchTraces traces;
    const augment::AugmentedBatch batch = augment::build_batch(tw.gather(idx), causal, matrix, c.cpa, c.cda, rng, &traces);
    for (Index k = 0; k < k_count; ++k) {
      const auto i = static_cast<std::size_t>(k);
      samples.push_back({{"end_index", tw.end_index(k)},
                         {"original", matrix_json(batch.samples[i])},
                         {"preserved", matrix_json(batch.samples[i + static_cast<std::size_t>(k_count)])},
                         {"disturbed_original", matrix_json(batch.samples[i + 2 * static_cast<std::size_t>(k_count)])},
                         {"disturbed_preserved", matrix_json(batch.samples[i + 3 * static_cast<std::size_t>(k_count)])},
                         {"cpa", augment::to_json(traces.cpa[i])},
                         {"cda_original", augment::to_json(traces.cda[i])},
                         {"cda_preserved", augment::to_json(traces.cda[i + static_cast<std::size_t>(k_count)])}});
    }
  }
  const json validity = {{"windows", tw.size()},
                         {"median_a_cd_original", median(original)},
                         {"median_a_cd_disturbed", median(disturbed)}};
  const fs::path dir = layout.augment_dir(seed);
  ensure_dir(dir);
  write_json(dir / "preview.json", {{"cda_validity", validity}, {"samples", samples}});
  write_manifest(dir, "augment", cfg, seed, {"preview.json"}, {{"cda_validity", validity}});
  log_line("augment: seed " + std::to_string(seed) + " median A_CD " + data::format_double(median(original)) +
           " -> " + data::format_double(median(disturbed)));
}

// ---- Scoring -------------------------------------------------------------------------

void cmd_score(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed, scoring::ScoreMode mode) {
  const causal::CausalModel causal = load_causal(cfg, layout, seed);
  (void)read_manifest(layout.encoder_dir(seed), "train", cfg);
  contrastive::EncoderModel encoder = contrastive::load_encoder(layout.encoder_dir(seed) / "model.json");
  const Dataset d = load_dataset(cfg, layout, seed);
  const scoring::Distance distance = cfg.resolved_distance();
  const scoring::Detector det = scoring::fit_detector(d.train_windows(cfg.window), causal, std::move(encoder),
                                                      cfg.contrastive.cpa, distance, seed ^ kCentroidStream);
  const fs::path dir = layout.scores_dir(seed, mode);
  ensure_dir(dir);
  std::vector<std::string> files;
  json variants = json::array();
  for (const TestSplit& t : d.tests) {
    const scoring::ScoreSeries s = scoring::score_dataset(normalized_windows(t.series, d.stats, cfg.window), det, mode);
    std::ofstream out = open_out(dir / values_file(t.name));
    scoring::write_scores_csv(out, s);
    files.push_back(values_file(t.name));
    variants.push_back(t.name);
  }
  write_json(dir / "detector.json", {{"centroid", row_json(det.centroid.mean.transpose())},
                                     {"centroid_count", det.centroid.count},
                                     {"stats",
                                      {{"cl_mean", det.stats.cl_mean},
                                       {"cl_std", det.stats.cl_std},
                                       {"cd_mean", det.stats.cd_mean},
                                       {"cd_std", det.stats.cd_std}}}});
  files.push_back("detector.json");
  write_manifest(dir, "score", cfg, seed, files,
                 {{"score_mode", scoring::to_string(mode)}, {"distance", scoring::to_string(distance)}, {"variants", variants}});
  log_line("score: seed " + std::to_string(seed) + " mode " + scoring::to_string(mode));
}

// ---- Reports -------------------------------------------------------------------------

eval::MetricsReport cmd_report(const ExperimentConfig& cfg, const Layout& layout, scoring::ScoreMode mode,
                               ReportFormat format) {
  std::vector<eval::RunReport> runs;
  std::string distance;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = layout.scores_dir(seed, mode);
    const json m = read_manifest(dir, "score", cfg);
    if (!distance.empty() && m.at("distance") != distance) throw ConfigError("seeds were scored with different distances");
    distance = m.at("distance").get<std::string>();
    std::map<std::string, scoring::ScoreSeries> scored;
    for (const auto& name : m.at("variants")) {
      std::ifstream in(dir / values_file(name.get<std::string>()));
      if (!in) throw ConfigError("missing scores for variant " + name.get<std::string>() + " in " + dir.string());
      scored[name.get<std::string>()] = scoring::read_scores_csv(in);
    }
    const bool synthetic = cfg.data.source == DataSource::synthetic;
    runs.push_back(eval::per_type_report(seed, scored, synthetic ? eval::synthetic_variants() : std::vector<std::string>{"test"}));
  }
  eval::MetricsReport rep = eval::aggregate(std::move(runs));
  const fs::path dir = layout.report_dir();
  ensure_dir(dir);
  const std::string base = "metrics-" + scoring::to_string(mode);
  std::string file;
  if (format == ReportFormat::json) {
    json j = eval::to_json(rep);
    j["config_hash"] = config_hash(cfg);
    j["score_mode"] = scoring::to_string(mode);
    j["distance"] = distance;
    j["config"] = to_json(cfg);
    file = base + ".json";
    write_json(dir / file, j);
  } else {
    file = base + ".csv";
    std::ofstream out = open_out(dir / file);
    eval::write_report_csv(out, rep);
  }
  write_manifest(dir, "report", cfg, std::nullopt, {file}, {{"score_mode", scoring::to_string(mode)}}, file + ".manifest.json");
  return rep;
}

eval::StabilityReport cmd_stability(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const Dataset d = load_dataset(cfg, layout, seed);
  causal::CausalConfig cc = cfg.causal;
  cc.seed = seed;
  const eval::StabilityReport r = eval::causal_stability_report(data::znormalize(d.train, d.stats), cc);
  const fs::path dir = layout.report_dir();
  ensure_dir(dir);
  const std::string file = "stability-seed-" + std::to_string(seed) + ".json";
  json j = eval::to_json(r);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = seed;
  write_json(dir / file, j);
  write_manifest(dir, "report", cfg, seed, {file}, json::object(), file + ".manifest.json");
  return r;
}

json cmd_sweep(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed) {
  const causal::CausalModel causal = load_causal(cfg, layout, seed);
  const Dataset d = load_dataset(cfg, layout, seed);
  const data::WindowSet tw = d.train_windows(cfg.window);
  const data::WindowSet vw = d.val_windows(cfg.window);
  json grid = json::array();
  double best = std::numeric_limits<double>::infinity();
  ExperimentConfig selected = cfg;
  for (double lr : cfg.sweep_learning_rates) {
    for (double wd : cfg.sweep_weight_decays) {
      contrastive::ContrastiveConfig c = contrastive_config(cfg, seed);
      c.adam.learning_rate = lr;
      c.adam.weight_decay = wd;
      const contrastive::EncoderTrainResult r = contrastive::train_encoder(tw, causal, c, &vw);
      const double val = r.log.at(static_cast<std::size_t>(r.best_epoch)).val_loss;
      grid.push_back({{"learning_rate", lr}, {"weight_decay", wd}, {"val_loss", val}, {"best_epoch", r.best_epoch}});
      log_line("sweep: lr " + data::format_double(lr) + " wd " + data::format_double(wd) + " val " + data::format_double(val));
      if (val < best) {
        best = val;
        selected.contrastive.adam.learning_rate = lr;
        selected.contrastive.adam.weight_decay = wd;
      }
    }
  }
  const json out = {{"config_hash", config_hash(cfg)},
                    {"seed", seed},
                    {"grid", grid},
                    {"selected",
                     {{"learning_rate", selected.contrastive.adam.learning_rate},
                      {"weight_decay", selected.contrastive.adam.weight_decay},
                      {"val_loss", best}}}};
  const fs::path dir = layout.report_dir();
  ensure_dir(dir);
  const std::string table = "sweep-seed-" + std::to_string(seed) + ".json";
  const std::string chosen = "sweep-seed-" + std::to_string(seed) + "-config.json";
  write_json(dir / table, out);
  write_json(dir / chosen, to_json(selected));
  write_manifest(dir, "report", cfg, seed, {table, chosen}, json::object(), table + ".manifest.json");
  return out;
}

std::vector<eval::SweepRow> cmd_difficulty(const ExperimentConfig& cfg, const Layout& layout, std::uint64_t seed,
                                           scoring::ScoreMode mode) {
  if (cfg.data.source != DataSource::synthetic) throw ConfigError("difficulty sweeps need a synthetic benchmark");
  const causal::CausalModel causal = load_causal(cfg, layout, seed);
  (void)read_manifest(layout.encoder_dir(seed), "train", cfg);
  contrastive::EncoderModel encoder = contrastive::load_encoder(layout.encoder_dir(seed) / "model.json");
  const Dataset d = load_dataset(cfg, layout, seed);
  if (!d.test_clean) throw ConfigError("clean test split missing; rerun `carots gen`");
  const scoring::Detector det = scoring::fit_detector(d.train_windows(cfg.window), causal, std::move(encoder),
                                                      cfg.contrastive.cpa, cfg.resolved_distance(), seed ^ kCentroidStream);
  const std::vector<eval::SweepRow> rows = eval::difficulty_sweep(
      det, *d.test_clean, d.stats, benchmark_config(cfg, seed).anomalies, cfg.difficulty_factors, mode);
  const fs::path dir = layout.report_dir();
  ensure_dir(dir);
  const std::string file = "difficulty-seed-" + std::to_string(seed) + "-" + scoring::to_string(mode) + ".json";
  write_json(dir / file, {{"config_hash", config_hash(cfg)}, {"seed", seed}, {"score_mode", scoring::to_string(mode)},
                          {"rows", eval::to_json(rows)}});
  write_manifest(dir, "report", cfg, seed, {file}, json::object(), file + ".manifest.json");
  return rows;
}

}  // namespace carots::cli
