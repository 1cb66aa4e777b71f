#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. Each one recomputes its quantity from the definition, by pair
// counting, per-threshold rescans or explicit set enumeration.

#include "carots/dataio/series.hpp"
#include "carots/eval/metrics.hpp"
#include "carots/nnet/param_set.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace carots::testing {

using nnet::Index;
using nnet::Matrix;

// Pair counting over every (positive, negative) pair.
inline double brute_auroc(const std::vector<double>& s, const data::Labels& l) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] == 0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

struct Confusion {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

inline Confusion at_threshold(const std::vector<double>& s, const data::Labels& l, double t) {
  Confusion c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool pred = s[i] >= t;
    if (pred && l[i] != 0) c.tp += 1.0;
    else if (pred) c.fp += 1.0;
    else if (l[i] != 0) c.fn += 1.0;
  }
  return c;
}

inline std::vector<double> unique_sorted(std::vector<double> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Rescans the data at every distinct threshold, highest first.
inline double brute_auprc(const std::vector<double>& s, const data::Labels& l) {
  std::vector<double> ts = unique_sorted(s);
  std::reverse(ts.begin(), ts.end());
  double ap = 0.0;
  double prev = 0.0;
  for (double t : ts) {
    const Confusion c = at_threshold(s, l, t);
    const double recall = c.tp / (c.tp + c.fn);
    ap += (recall - prev) * c.tp / (c.tp + c.fp);
    prev = recall;
  }
  return ap;
}

// Ascending sweep with strict improvement keeps the lowest tied threshold.
inline eval::BestF1 brute_best_f1(const std::vector<double>& s, const data::Labels& l) {
  eval::BestF1 best{-1.0, 0.0};
  for (double t : unique_sorted(s)) {
    const Confusion c = at_threshold(s, l, t);
    const double f1 = 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
    if (f1 > best.f1) best = {f1, t};
  }
  return best;
}

inline double f1_at(const std::vector<double>& s, const data::Labels& l, double t) {
  const Confusion c = at_threshold(s, l, t);
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

inline double cosine(const Matrix& e, Index i, Index j) {
  return e.row(i).dot(e.row(j)) / (e.row(i).norm() * e.row(j).norm());
}

struct Brute {
  double loss = 0.0;
  double ratio = 0.0;
  std::vector<std::vector<Index>> positives;
};

// Direct enumeration of the filter sets and terms, with plain exp/log.
inline Brute brute_soc(const Matrix& e, double alpha, double tau, bool include_self) {
  const Index n = e.rows();
  const Index half = n / 2;
  Brute out;
  Index kept = 0;
  for (Index i = 0; i < half; ++i) {
    std::vector<Index> p;
    for (Index j = 0; j < half; ++j) {
      const bool pass = (j == i) ? include_self : cosine(e, i, j) / tau >= alpha / tau;
      if (pass) p.push_back(j);
    }
    out.positives.push_back(p);
    kept += static_cast<Index>(p.size());
    if (p.empty()) continue;
    double anchor = 0.0;
    for (Index j : p) {
      double denom = std::exp(cosine(e, i, j) / tau);
      for (Index k : p) denom += std::exp(cosine(e, i, k + half) / tau);
      anchor += -std::log(std::exp(cosine(e, i, j) / tau) / denom);
    }
    out.loss += anchor / static_cast<double>(p.size());
  }
  out.loss /= static_cast<double>(half);
  out.ratio = static_cast<double>(kept) / static_cast<double>(half * half);
  return out;
}

// Pair-counting AUROC, used as the edge-recovery oracle.
inline double pair_auroc(const Matrix& scores, const Matrix& truth) {
  double wins = 0.0;
  double pairs = 0.0;
  for (Index a = 0; a < scores.size(); ++a) {
    for (Index b = 0; b < scores.size(); ++b) {
      if (truth(a) != 1.0 || truth(b) != 0.0) continue;
      wins += scores(a) > scores(b) ? 1.0 : (scores(a) == scores(b) ? 0.5 : 0.0);
      pairs += 1.0;
    }
  }
  return wins / pairs;
}

}  // namespace carots::testing
