#pragma once

#include "carots/dataio/series.hpp"

#include <vector>

namespace carots::eval {

/// Probability that a random positive outranks a random negative; tied pairs
/// count one half. Throws UndefinedMetricError unless both classes occur.
double auroc(const std::vector<double>& scores, const data::Labels& labels);

/// Average precision: sum over descending distinct thresholds of
/// precision * (recall increment). Tied scores form one threshold.
double auprc(const std::vector<double>& scores, const data::Labels& labels);

struct BestF1 {
  double f1 = 0.0;
  /// Windows with score >= threshold are predicted anomalous.
  double threshold = 0.0;
};

/// Maximum window-level F1 over thresholds at the distinct score values, with
/// no point adjustment. Equal F1 values resolve to the lower threshold.
BestF1 best_f1(const std::vector<double>& scores, const data::Labels& labels);

struct MetricSet {
  double auroc = 0.0;
  double auprc = 0.0;
  double best_f1 = 0.0;
  double best_threshold = 0.0;
};

MetricSet compute_metrics(const std::vector<double>& scores, const data::Labels& labels);

}  // namespace carots::eval
