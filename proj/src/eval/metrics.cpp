#include "carots/eval/metrics.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carots::eval {

namespace {

struct Counts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Counts check_inputs(const std::vector<double>& scores, const data::Labels& labels, const char* metric) {
  if (scores.size() != labels.size()) {
    throw ShapeError(std::string(metric) + ": " + std::to_string(scores.size()) + " scores but " +
                     std::to_string(labels.size()) + " labels");
  }
  Counts c;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (std::isnan(scores[k])) throw NumericalError(std::string(metric) + ": NaN score at index " + std::to_string(k));
    if (labels[k] > 1) throw ConfigError(std::string(metric) + ": labels must be 0 or 1");
    (labels[k] != 0 ? c.positives : c.negatives) += 1;
  }
  return c;
}

void require_both(const Counts& c, const char* metric) {
  if (c.positives == 0 || c.negatives == 0) {
    throw UndefinedMetricError(std::string(metric) + " is undefined when labels contain a single class");
  }
}

// Indices ordered by descending score.
std::vector<std::size_t> descending(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// Calls f(threshold, tp, fp) after each block of tied scores, highest first.
template <typename F>
void sweep(const std::vector<double>& scores, const data::Labels& labels, F&& f) {
  const std::vector<std::size_t> idx = descending(scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    const double threshold = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == threshold) {
      (labels[idx[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    f(threshold, tp, fp);
  }
}

}  // namespace

double auroc(const std::vector<double>& scores, const data::Labels& labels) {
  const Counts c = check_inputs(scores, labels, "AUROC");
  require_both(c, "AUROC");
  // Mann-Whitney U from mid-ranks.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::size_t pos = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      pos += labels[idx[j]];
      ++j;
    }
    rank_sum += static_cast<double>(pos) * static_cast<double>(i + j + 1) / 2.0;
    i = j;
  }
  const auto p = static_cast<double>(c.positives);
  const auto n = static_cast<double>(c.negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auprc(const std::vector<double>& scores, const data::Labels& labels) {
  const Counts c = check_inputs(scores, labels, "AUPRC");
  if (c.positives == 0) throw UndefinedMetricError("AUPRC is undefined without positive labels");
  const auto p = static_cast<double>(c.positives);
  double ap = 0.0;
  double prev_recall = 0.0;
  sweep(scores, labels, [&](double, std::size_t tp, std::size_t fp) {
    const double recall = static_cast<double>(tp) / p;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  });
  return ap;
}

BestF1 best_f1(const std::vector<double>& scores, const data::Labels& labels) {
  const Counts c = check_inputs(scores, labels, "best F1");
  require_both(c, "best F1");
  BestF1 best{-1.0, 0.0};
  sweep(scores, labels, [&](double threshold, std::size_t tp, std::size_t fp) {
    const std::size_t fn = c.positives - tp;
    const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    if (f1 >= best.f1) best = {f1, threshold};
  });
  return best;
}

MetricSet compute_metrics(const std::vector<double>& scores, const data::Labels& labels) {
  MetricSet m;
  m.auroc = auroc(scores, labels);
  m.auprc = auprc(scores, labels);
  const BestF1 f = best_f1(scores, labels);
  m.best_f1 = f.f1;
  m.best_threshold = f.threshold;
  return m;
}

}  // namespace carots::eval
