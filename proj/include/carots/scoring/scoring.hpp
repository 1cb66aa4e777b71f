#pragma once

#include "carots/augment/augment.hpp"
#include "carots/contrastive/encoder.hpp"
#include "carots/dataio/series.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace carots::scoring {

using nnet::Index;
using nnet::Matrix;
using nnet::Vector;

enum class Distance { l2, cosine };
enum class ScoreMode { ensemble, cl_only, cd_only };

std::string to_string(Distance d);
Distance parse_distance(const std::string& s);
std::string to_string(ScoreMode m);
ScoreMode parse_score_mode(const std::string& s);

/// Mean embedding of the training positives: every original window plus one
/// seeded CPA sample of it.
struct Centroid {
  Vector mean;
  Index count = 0;
};

Centroid compute_centroid(const data::WindowSet& train, const contrastive::EncoderModel& encoder,
                          const causal::CausalModel& causal, const augment::CpaConfig& cpa,
                          std::uint64_t seed, Index chunk = 1024);

/// L2 distance, or 1 - cosine similarity.
double embedding_distance(const Vector& embedding, const Vector& centroid, Distance d);

double score_cl(const contrastive::EncoderModel& encoder, const Centroid& centroid, const Matrix& window,
                Distance d);
/// Mean squared error of the one-step forecast of the window's last row.
double score_cd(const causal::CausalModel& causal, const Matrix& window);

struct RawScores {
  std::vector<double> a_cl;
  std::vector<double> a_cd;
};

RawScores raw_scores(const data::WindowSet& windows, const contrastive::EncoderModel& encoder,
                     const Centroid& centroid, const causal::CausalModel& causal, Distance d,
                     Index chunk = 1024);

struct ScoreStats {
  static constexpr double kStdFloor = 1e-8;
  double cl_mean = 0.0;
  double cl_std = 1.0;
  double cd_mean = 0.0;
  double cd_std = 1.0;

  double z_cl(double a) const { return (a - cl_mean) / cl_std; }
  double z_cd(double a) const { return (a - cd_mean) / cd_std; }
};

/// Population mean/std of both raw scores; stds floored at kStdFloor.
/// Needs at least two windows.
ScoreStats fit_score_stats(const RawScores& train);

double ensemble(const ScoreStats& stats, double a_cl, double a_cd);

struct ScoreSeries {
  std::vector<Index> end_index;
  std::vector<double> a_cl;
  std::vector<double> a_cd;
  std::vector<double> a_cl_norm;
  std::vector<double> a_cd_norm;
  std::vector<double> ensemble;  ///< a_cl_norm + a_cd_norm
  /// The score selected by the mode: ensemble, a_cl_norm or a_cd_norm.
  std::vector<double> score;
  data::Labels labels;
  ScoreMode mode = ScoreMode::ensemble;

  Index size() const { return static_cast<Index>(score.size()); }
};

/// Normalizes raw scores with frozen training stats.
ScoreSeries assemble(const RawScores& raw, const ScoreStats& stats, ScoreMode mode,
                     const std::vector<Index>& end_index, const data::Labels& labels);

/// Frozen detector: both models, the centroid and the training stats.
struct Detector {
  causal::CausalModel causal;
  contrastive::EncoderModel encoder;
  Centroid centroid;
  ScoreStats stats;
  Distance distance = Distance::l2;
};

Detector fit_detector(const data::WindowSet& train, causal::CausalModel causal,
                      contrastive::EncoderModel encoder, const augment::CpaConfig& cpa,
                      Distance distance, std::uint64_t seed);

ScoreSeries score_dataset(const data::WindowSet& test, const Detector& detector, ScoreMode mode);

/// Columns end_index,a_cl,a_cd,a_cl_norm,a_cd_norm,ensemble,label,score; the
/// mode is recorded in the header of the last column as score:<mode>.
void write_scores_csv(std::ostream& out, const ScoreSeries& s);
ScoreSeries read_scores_csv(std::istream& in);

}  // namespace carots::scoring
