#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace carots::data {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using Labels = std::vector<std::uint8_t>;

/// A T x N multivariate series with a binary anomaly label per timestep.
struct LabeledSeries {
  Matrix values;
  Labels labels;
  std::vector<std::string> names;

  Index length() const { return values.rows(); }
  Index variables() const { return values.cols(); }
  Index anomaly_count() const;

  /// Throws ShapeError when labels/names disagree with the value matrix.
  void validate() const;

  /// Wraps values with all-zero labels and names x0..x{N-1}.
  static LabeledSeries unlabeled(Matrix values);
};

std::vector<std::string> default_names(Index n);

/// Rows [begin, begin + count).
LabeledSeries slice(const LabeledSeries& s, Index begin, Index count);
/// Rows of `a` followed by rows of `b`.
LabeledSeries concat(const LabeledSeries& a, const LabeledSeries& b);

// ---- CSV -------------------------------------------------------------------
// Values file: header row of variable names, then one numeric row per timestep.
// Labels file: header "label", then one 0/1 per timestep.

LabeledSeries load_csv(const std::filesystem::path& values,
                       const std::optional<std::filesystem::path>& labels = std::nullopt);
void write_csv(const LabeledSeries& s, const std::filesystem::path& values,
               const std::optional<std::filesystem::path>& labels = std::nullopt);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// ---- Splitting / normalization / resampling --------------------------------

/// Chronological split: the final `val_fraction` of rows become validation.
/// Each part must hold at least one window of width `window`.
std::pair<LabeledSeries, LabeledSeries> split_train_val(const LabeledSeries& s,
                                                        double val_fraction = 0.2,
                                                        Index window = 2);

struct NormStats {
  static constexpr double kStdFloor = 1e-8;
  RowVector mean;
  RowVector std;  ///< population std, floored at kStdFloor
};

NormStats fit_norm_stats(const LabeledSeries& train);
LabeledSeries znormalize(const LabeledSeries& s, const NormStats& stats);
LabeledSeries denormalize(const LabeledSeries& s, const NormStats& stats);

/// Keeps the first timestep of every block of `factor` rows; its label is the
/// OR over the block.
LabeledSeries downsample(const LabeledSeries& s, Index factor);

// ---- Windows ---------------------------------------------------------------

/// Stride-1 sliding windows over a series. Window k covers rows
/// [end(k) - w + 1, end(k)]; its label is 1 iff any covered timestep is anomalous.
class WindowSet {
 public:
  WindowSet() = default;
  WindowSet(std::shared_ptr<const Matrix> values, Index width, std::vector<Index> ends,
            Labels labels);

  Index size() const { return static_cast<Index>(ends_.size()); }
  Index width() const { return width_; }
  Index variables() const { return values_ ? values_->cols() : 0; }

  Matrix window(Index k) const;
  Index end_index(Index k) const { return ends_.at(static_cast<std::size_t>(k)); }
  std::uint8_t label(Index k) const { return labels_.at(static_cast<std::size_t>(k)); }
  const Labels& labels() const { return labels_; }
  const std::vector<Index>& end_indices() const { return ends_; }

  std::vector<Matrix> gather(std::span<const Index> indices) const;
  std::vector<Matrix> all() const;

 private:
  std::shared_ptr<const Matrix> values_;
  Index width_ = 0;
  std::vector<Index> ends_;
  Labels labels_;
};

/// T - w + 1 windows. Throws ConfigError for w < 2 or T < w.
WindowSet make_windows(const LabeledSeries& s, Index w);

}  // namespace carots::data
