#include "carots/scoring/scoring.hpp"

#include "carots/error.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace carots::scoring {

std::string to_string(Distance d) { return d == Distance::l2 ? "l2" : "cosine"; }

Distance parse_distance(const std::string& s) {
  if (s == "l2") return Distance::l2;
  if (s == "cosine") return Distance::cosine;
  throw ConfigError("unknown distance '" + s + "' (expected l2 or cosine)");
}

std::string to_string(ScoreMode m) {
  switch (m) {
    case ScoreMode::ensemble: return "ensemble";
    case ScoreMode::cl_only: return "cl-only";
    case ScoreMode::cd_only: return "cd-only";
  }
  return "ensemble";
}

ScoreMode parse_score_mode(const std::string& s) {
  if (s == "ensemble") return ScoreMode::ensemble;
  if (s == "cl-only") return ScoreMode::cl_only;
  if (s == "cd-only") return ScoreMode::cd_only;
  throw ConfigError("unknown score mode '" + s + "' (expected ensemble, cl-only or cd-only)");
}

namespace {

std::vector<Index> iota_range(Index begin, Index count) {
  std::vector<Index> idx(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) idx[static_cast<std::size_t>(k)] = begin + k;
  return idx;
}

void check_compatible(const data::WindowSet& ws, const contrastive::EncoderModel& encoder,
                      const causal::CausalModel& causal) {
  if (ws.width() != encoder.window() || ws.width() != causal.window()) {
    throw ConfigError("window width " + std::to_string(ws.width()) + " does not match the trained models (" +
                      std::to_string(encoder.window()) + ")");
  }
  if (ws.variables() != encoder.variables() || ws.variables() != causal.variables()) {
    throw ConfigError("variable count does not match the trained models");
  }
}

}  // namespace

Centroid compute_centroid(const data::WindowSet& train, const contrastive::EncoderModel& encoder,
                          const causal::CausalModel& causal, const augment::CpaConfig& cpa,
                          std::uint64_t seed, Index chunk) {
  check_compatible(train, encoder, causal);
  if (train.size() < 1) throw ConfigError("centroid needs at least one training window");
  nnet::Rng rng(seed);
  Vector sum = Vector::Zero(encoder.config().embedding);
  for (Index begin = 0; begin < train.size(); begin += chunk) {
    const Index count = std::min(chunk, train.size() - begin);
    const auto idx = iota_range(begin, count);
    std::vector<Matrix> windows = train.gather(idx);
    std::vector<Matrix> preserved = augment::cpa_batch(windows, causal, cpa, rng);
    sum += encoder.encode_batch(windows).colwise().sum().transpose();
    sum += encoder.encode_batch(preserved).colwise().sum().transpose();
  }
  Centroid c;
  c.count = 2 * train.size();
  c.mean = sum / static_cast<double>(c.count);
  return c;
}

double embedding_distance(const Vector& embedding, const Vector& centroid, Distance d) {
  if (embedding.size() != centroid.size()) throw ShapeError("embedding and centroid differ in size");
  if (d == Distance::l2) return (embedding - centroid).norm();
  const double denom = embedding.norm() * centroid.norm();
  if (!(denom > 0.0)) return 1.0;
  return 1.0 - embedding.dot(centroid) / denom;
}

double score_cl(const contrastive::EncoderModel& encoder, const Centroid& centroid, const Matrix& window,
                Distance d) {
  return embedding_distance(encoder.encode(window), centroid.mean, d);
}

double score_cd(const causal::CausalModel& causal, const Matrix& window) {
  if (window.rows() != causal.window()) throw ShapeError("window width does not match the causal model");
  const Vector pred = causal.forecast(window.topRows(window.rows() - 1));
  return (pred - window.row(window.rows() - 1).transpose()).squaredNorm() / static_cast<double>(pred.size());
}

RawScores raw_scores(const data::WindowSet& windows, const contrastive::EncoderModel& encoder,
                     const Centroid& centroid, const causal::CausalModel& causal, Distance d, Index chunk) {
  check_compatible(windows, encoder, causal);
  RawScores out;
  out.a_cl.reserve(static_cast<std::size_t>(windows.size()));
  out.a_cd.reserve(static_cast<std::size_t>(windows.size()));
  for (Index begin = 0; begin < windows.size(); begin += chunk) {
    const Index count = std::min(chunk, windows.size() - begin);
    const std::vector<Matrix> batch = windows.gather(iota_range(begin, count));
    const Matrix emb = encoder.encode_batch(batch);
    Matrix inputs;
    Matrix targets;
    causal::split_windows(batch, inputs, targets);
    const Matrix pred = causal.forecast_flat(inputs);
    for (Index k = 0; k < count; ++k) {
      out.a_cl.push_back(embedding_distance(emb.row(k).transpose(), centroid.mean, d));
      out.a_cd.push_back((pred.row(k) - targets.row(k)).squaredNorm() / static_cast<double>(pred.cols()));
    }
  }
  return out;
}

ScoreStats fit_score_stats(const RawScores& train) {
  const std::size_t n = train.a_cl.size();
  if (n < 2 || train.a_cd.size() != n) throw ConfigError("score statistics need at least two training windows");
  auto moments = [n](const std::vector<double>& v, double& mean, double& std) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std = std::max(std::sqrt(ss / static_cast<double>(n)), ScoreStats::kStdFloor);
  };
  ScoreStats st;
  moments(train.a_cl, st.cl_mean, st.cl_std);
  moments(train.a_cd, st.cd_mean, st.cd_std);
  return st;
}

double ensemble(const ScoreStats& stats, double a_cl, double a_cd) { return stats.z_cl(a_cl) + stats.z_cd(a_cd); }

ScoreSeries assemble(const RawScores& raw, const ScoreStats& stats, ScoreMode mode,
                     const std::vector<Index>& end_index, const data::Labels& labels) {
  const std::size_t n = raw.a_cl.size();
  if (raw.a_cd.size() != n || end_index.size() != n || labels.size() != n) {
    throw ShapeError("score columns differ in length");
  }
  ScoreSeries s;
  s.mode = mode;
  s.end_index = end_index;
  s.labels = labels;
  s.a_cl = raw.a_cl;
  s.a_cd = raw.a_cd;
  for (std::size_t k = 0; k < n; ++k) {
    const double zc = stats.z_cl(raw.a_cl[k]);
    const double zd = stats.z_cd(raw.a_cd[k]);
    s.a_cl_norm.push_back(zc);
    s.a_cd_norm.push_back(zd);
    s.ensemble.push_back(zc + zd);
    s.score.push_back(mode == ScoreMode::ensemble ? zc + zd : (mode == ScoreMode::cl_only ? zc : zd));
  }
  return s;
}

Detector fit_detector(const data::WindowSet& train, causal::CausalModel causal,
                      contrastive::EncoderModel encoder, const augment::CpaConfig& cpa, Distance distance,
                      std::uint64_t seed) {
  Detector d;
  d.centroid = compute_centroid(train, encoder, causal, cpa, seed);
  d.stats = fit_score_stats(raw_scores(train, encoder, d.centroid, causal, distance));
  d.causal = std::move(causal);
  d.encoder = std::move(encoder);
  d.distance = distance;
  return d;
}

ScoreSeries score_dataset(const data::WindowSet& test, const Detector& detector, ScoreMode mode) {
  const RawScores raw = raw_scores(test, detector.encoder, detector.centroid, detector.causal, detector.distance);
  return assemble(raw, detector.stats, mode, test.end_indices(), test.labels());
}

void write_scores_csv(std::ostream& out, const ScoreSeries& s) {
  out << "end_index,a_cl,a_cd,a_cl_norm,a_cd_norm,ensemble,label,score:" << to_string(s.mode) << '\n';
  for (std::size_t k = 0; k < s.score.size(); ++k) {
    out << s.end_index[k] << ',' << data::format_double(s.a_cl[k]) << ',' << data::format_double(s.a_cd[k]) << ','
        << data::format_double(s.a_cl_norm[k]) << ',' << data::format_double(s.a_cd_norm[k]) << ','
        << data::format_double(s.ensemble[k]) << ',' << static_cast<int>(s.labels[k]) << ','
        << data::format_double(s.score[k]) << '\n';
  }
}

namespace {

double parse_number(const std::string& cell, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("scores row " + std::to_string(row) + ": '" + cell + "' is not a number");
  }
  return v;
}

}  // namespace

ScoreSeries read_scores_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty scores file");
  const std::string prefix = "end_index,a_cl,a_cd,a_cl_norm,a_cd_norm,ensemble,label,score:";
  if (line.rfind(prefix, 0) != 0) throw ParseError("unexpected scores header");
  ScoreSeries s;
  s.mode = parse_score_mode(line.substr(prefix.size()));
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw ParseError("scores row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " fields");
    s.end_index.push_back(static_cast<Index>(parse_number(cells[0], row)));
    s.a_cl.push_back(parse_number(cells[1], row));
    s.a_cd.push_back(parse_number(cells[2], row));
    s.a_cl_norm.push_back(parse_number(cells[3], row));
    s.a_cd_norm.push_back(parse_number(cells[4], row));
    s.ensemble.push_back(parse_number(cells[5], row));
    const double label = parse_number(cells[6], row);
    if (label != 0.0 && label != 1.0) throw ParseError("scores row " + std::to_string(row) + ": label must be 0 or 1");
    s.labels.push_back(static_cast<std::uint8_t>(label));
    s.score.push_back(parse_number(cells[7], row));
  }
  return s;
}

}  // namespace carots::scoring
