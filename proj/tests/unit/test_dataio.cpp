#include "doctest.h"

#include "carots/dataio/series.hpp"
#include "carots/error.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace carots;
using namespace carots::data;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("carots_dataio_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

LabeledSeries random_series(Index t, Index n, std::mt19937_64& rng, double anomaly_p = 0.0) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::bernoulli_distribution coin(anomaly_p);
  Matrix m(t, n);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = d(rng);
  LabeledSeries s = LabeledSeries::unlabeled(m);
  for (auto& l : s.labels) l = coin(rng) ? 1 : 0;
  return s;
}

}  // namespace

TEST_CASE("load_csv parses a 3x2 file and defaults labels to zero") {
  auto p = temp_file("small.csv");
  write_text(p, "a,b\n1,2\n3,4.5\n-1e3,0\n");
  LabeledSeries s = load_csv(p);
  CHECK(s.length() == 3);
  CHECK(s.variables() == 2);
  CHECK(s.names == std::vector<std::string>{"a", "b"});
  CHECK(s.values(2, 0) == -1000.0);
  CHECK(s.anomaly_count() == 0);
}

TEST_CASE("load_csv rejects header-only, ragged and non-numeric input with row numbers") {
  auto p = temp_file("bad.csv");
  write_text(p, "a,b\n");
  CHECK_THROWS_AS(load_csv(p), ParseError);

  write_text(p, "a,b\n1,2\n3\n");
  try {
    load_csv(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }

  write_text(p, "a,b\n1,2\n3,abc\n");
  try {
    load_csv(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("write_csv then load_csv reproduces values and labels exactly") {
  std::mt19937_64 rng(4);
  LabeledSeries s = random_series(50, 4, rng, 0.1);
  s.values(0, 0) = 0.1 + 0.2;
  s.values(1, 1) = 1e-300;
  auto vp = temp_file("rt_values.csv");
  auto lp = temp_file("rt_labels.csv");
  write_csv(s, vp, lp);
  LabeledSeries back = load_csv(vp, lp);
  CHECK(back.values == s.values);
  CHECK(back.labels == s.labels);
  CHECK(back.names == s.names);
}

TEST_CASE("split_train_val is a chronological 80/20 split") {
  std::mt19937_64 rng(5);
  LabeledSeries s = random_series(100, 3, rng);
  auto [train, val] = split_train_val(s, 0.2, 2);
  CHECK(train.length() == 80);
  CHECK(val.length() == 20);
  LabeledSeries joined = concat(train, val);
  CHECK(joined.values == s.values);
  CHECK(joined.labels == s.labels);
  CHECK_THROWS_AS(split_train_val(s, 0.0, 2), ConfigError);
  CHECK_THROWS_AS(split_train_val(s, 0.2, 30), ConfigError);
}

TEST_CASE("znormalize uses supplied stats and floors constant channels") {
  LabeledSeries s = LabeledSeries::unlabeled((Matrix(3, 2) << 1, 7, 2, 7, 3, 7).finished());
  NormStats st;
  st.mean = RowVector::Constant(2, 2.0);
  st.std = RowVector::Constant(2, 1.0);
  LabeledSeries z = znormalize(s, st);
  CHECK(z.values(0, 0) == -1.0);
  CHECK(z.values(1, 0) == 0.0);
  CHECK(z.values(2, 0) == 1.0);

  NormStats fitted = fit_norm_stats(s);
  CHECK(fitted.std(1) == NormStats::kStdFloor);
  LabeledSeries zf = znormalize(s, fitted);
  CHECK(zf.values.col(1).isZero(0.0));

  st.mean = RowVector::Zero(3);
  CHECK_THROWS_AS(znormalize(s, st), ShapeError);
}

TEST_CASE("normalization round trip and already-standard data") {
  std::mt19937_64 rng(6);
  LabeledSeries s = random_series(200, 5, rng);
  NormStats st = fit_norm_stats(s);
  LabeledSeries z = znormalize(s, st);
  CHECK((denormalize(z, st).values - s.values).cwiseAbs().maxCoeff() < 1e-10);
  LabeledSeries zz = znormalize(z, fit_norm_stats(z));
  CHECK((zz.values - z.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("normalization stats come from the train split alone") {
  std::mt19937_64 rng(7);
  LabeledSeries s = random_series(100, 3, rng);
  auto [train, val] = split_train_val(s, 0.2, 2);
  NormStats st = fit_norm_stats(train);
  NormStats again = fit_norm_stats(slice(s, 0, 80));
  CHECK(st.mean == again.mean);
  CHECK(st.std == again.std);
  CHECK(st.mean != fit_norm_stats(s).mean);
}

TEST_CASE("make_windows counts, contents and labels") {
  LabeledSeries s = LabeledSeries::unlabeled(Matrix::Random(12, 3));
  WindowSet ws = make_windows(s, 10);
  CHECK(ws.size() == 3);
  CHECK(ws.window(2) == s.values.bottomRows(10));
  CHECK(ws.end_index(0) == 9);
  CHECK_THROWS_AS(make_windows(s, 1), ConfigError);
  CHECK_THROWS_AS(make_windows(s, 13), ConfigError);
}

TEST_CASE("window labels: 1 iff any covered timestep is anomalous (property)") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<Index> len(5, 60);
    std::uniform_int_distribution<Index> win(2, 5);
    LabeledSeries s = random_series(len(rng), 2, rng, 0.1);
    const Index w = win(rng);
    WindowSet ws = make_windows(s, w);
    CHECK(ws.size() == s.length() - w + 1);
    Index anomalous_windows = 0;
    for (Index k = 0; k < ws.size(); ++k) {
      bool any = false;
      for (Index t = ws.end_index(k) - w + 1; t <= ws.end_index(k); ++t) any = any || s.labels[t];
      CHECK(ws.label(k) == (any ? 1 : 0));
      anomalous_windows += ws.label(k);
    }
    CHECK(anomalous_windows * w >= s.anomaly_count());
  }
}

TEST_CASE("downsample keeps block heads and OR-pools labels") {
  std::mt19937_64 rng(9);
  LabeledSeries s = random_series(10, 2, rng);
  CHECK(downsample(s, 1).values == s.values);
  LabeledSeries d = downsample(s, 5);
  CHECK(d.length() == 2);
  CHECK(d.values.row(1) == s.values.row(5));
  s.labels[7] = 1;
  d = downsample(s, 5);
  CHECK(d.labels == Labels{0, 1});
  CHECK_THROWS_AS(downsample(s, 0), ConfigError);

  // OR-pooling oracle on random inputs.
  for (int trial = 0; trial < 20; ++trial) {
    LabeledSeries r = random_series(37, 1, rng, 0.05);
    const Index f = 1 + trial % 6;
    LabeledSeries ds = downsample(r, f);
    for (Index k = 0; k < ds.length(); ++k) {
      std::uint8_t expect = 0;
      for (Index t = k * f; t < std::min<Index>((k + 1) * f, r.length()); ++t) expect |= r.labels[t];
      CHECK(ds.labels[k] == expect);
    }
  }
}
