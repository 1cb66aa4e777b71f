#include "carots/dataio/series.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace carots::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim whitespace and a trailing '\r' from CRLF files.
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, const std::string& file, std::size_t line_no) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(file + ": row " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
  }
  return v;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Index LabeledSeries::anomaly_count() const {
  return static_cast<Index>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void LabeledSeries::validate() const {
  if (static_cast<Index>(labels.size()) != values.rows()) {
    throw ShapeError("series has " + std::to_string(values.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (static_cast<Index>(names.size()) != values.cols()) {
    throw ShapeError("series has " + std::to_string(values.cols()) + " columns but " +
                     std::to_string(names.size()) + " names");
  }
}

LabeledSeries LabeledSeries::unlabeled(Matrix values) {
  LabeledSeries s;
  s.labels.assign(static_cast<std::size_t>(values.rows()), 0);
  s.names = default_names(values.cols());
  s.values = std::move(values);
  return s;
}

std::vector<std::string> default_names(Index n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

LabeledSeries slice(const LabeledSeries& s, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > s.length()) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for length " + std::to_string(s.length()));
  }
  LabeledSeries out;
  out.values = s.values.middleRows(begin, count);
  out.labels.assign(s.labels.begin() + begin, s.labels.begin() + begin + count);
  out.names = s.names;
  return out;
}

LabeledSeries concat(const LabeledSeries& a, const LabeledSeries& b) {
  if (a.variables() != b.variables()) throw ShapeError("concat: variable count mismatch");
  LabeledSeries out;
  out.values.resize(a.length() + b.length(), a.variables());
  out.values << a.values, b.values;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.names = a.names;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

LabeledSeries load_csv(const std::filesystem::path& values,
                       const std::optional<std::filesystem::path>& labels) {
  const std::string file = values.string();
  std::ifstream in(values);
  if (!in) throw ParseError("cannot open " + file);

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw ParseError(file + ": missing header row");

  const std::size_t n = header.size();
  std::vector<double> flat;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto cells = split_line(line);
    if (cells.size() != n) {
      throw ParseError(file + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(n));
    }
    for (const auto& c : cells) flat.push_back(parse_double(c, file, line_no));
    ++rows;
  }
  if (rows == 0) throw ParseError(file + ": empty series (header only)");

  LabeledSeries s;
  s.names = header;
  s.values.resize(rows, static_cast<Index>(n));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < static_cast<Index>(n); ++c) {
      s.values(r, c) = flat[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
    }
  }
  s.labels.assign(static_cast<std::size_t>(rows), 0);

  if (labels && std::filesystem::exists(*labels)) {
    const std::string lfile = labels->string();
    std::ifstream lin(*labels);
    if (!lin) throw ParseError("cannot open " + lfile);
    std::vector<std::uint8_t> lab;
    std::size_t lno = 0;
    bool first = true;
    while (std::getline(lin, line)) {
      ++lno;
      if (blank(line)) continue;
      auto cells = split_line(line);
      if (cells.size() != 1) {
        throw ParseError(lfile + ": row " + std::to_string(lno) + " must have exactly one cell");
      }
      if (first) {
        first = false;
        if (cells[0] == "label") continue;
      }
      const double v = parse_double(cells[0], lfile, lno);
      if (v != 0.0 && v != 1.0) {
        throw ParseError(lfile + ": row " + std::to_string(lno) + ": label must be 0 or 1");
      }
      lab.push_back(static_cast<std::uint8_t>(v));
    }
    if (static_cast<Index>(lab.size()) != rows) {
      throw ParseError(lfile + ": " + std::to_string(lab.size()) + " labels for " +
                       std::to_string(rows) + " rows");
    }
    s.labels = std::move(lab);
  }
  return s;
}

void write_csv(const LabeledSeries& s, const std::filesystem::path& values,
               const std::optional<std::filesystem::path>& labels) {
  s.validate();
  std::ofstream out(values);
  if (!out) throw ConfigError("cannot write " + values.string());
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    if (i) out << ',';
    out << s.names[i];
  }
  out << '\n';
  for (Index r = 0; r < s.length(); ++r) {
    for (Index c = 0; c < s.variables(); ++c) {
      if (c) out << ',';
      out << format_double(s.values(r, c));
    }
    out << '\n';
  }
  if (labels) {
    std::ofstream lout(*labels);
    if (!lout) throw ConfigError("cannot write " + labels->string());
    lout << "label\n";
    for (auto l : s.labels) lout << static_cast<int>(l) << '\n';
  }
}

std::pair<LabeledSeries, LabeledSeries> split_train_val(const LabeledSeries& s, double val_fraction,
                                                        Index window) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in (0, 1), got " + format_double(val_fraction));
  }
  const Index n_val = static_cast<Index>(std::llround(static_cast<double>(s.length()) * val_fraction));
  const Index n_train = s.length() - n_val;
  if (n_val < window || n_train < window) {
    throw ConfigError("series of length " + std::to_string(s.length()) +
                      " too short to hold a window of " + std::to_string(window) +
                      " in both splits");
  }
  return {slice(s, 0, n_train), slice(s, n_train, n_val)};
}

NormStats fit_norm_stats(const LabeledSeries& train) {
  if (train.length() == 0) throw ConfigError("cannot fit normalization on an empty series");
  NormStats st;
  st.mean = train.values.colwise().mean();
  const Matrix centered = train.values.rowwise() - st.mean;
  st.std = (centered.array().square().colwise().sum() / static_cast<double>(train.length())).sqrt();
  st.std = st.std.cwiseMax(NormStats::kStdFloor);
  return st;
}

LabeledSeries znormalize(const LabeledSeries& s, const NormStats& stats) {
  if (stats.mean.size() != s.variables() || stats.std.size() != s.variables()) {
    throw ShapeError("normalization stats have " + std::to_string(stats.mean.size()) +
                     " variables, series has " + std::to_string(s.variables()));
  }
  LabeledSeries out = s;
  out.values = ((s.values.rowwise() - stats.mean).array().rowwise() /
                stats.std.cwiseMax(NormStats::kStdFloor).array())
                   .matrix();
  return out;
}

LabeledSeries denormalize(const LabeledSeries& s, const NormStats& stats) {
  if (stats.mean.size() != s.variables() || stats.std.size() != s.variables()) {
    throw ShapeError("normalization stats do not match series width");
  }
  LabeledSeries out = s;
  out.values = (s.values.array().rowwise() * stats.std.cwiseMax(NormStats::kStdFloor).array())
                   .matrix()
                   .rowwise() +
               stats.mean;
  return out;
}

LabeledSeries downsample(const LabeledSeries& s, Index factor) {
  if (factor <= 0) throw ConfigError("downsample factor must be >= 1");
  const Index kept = (s.length() + factor - 1) / factor;
  LabeledSeries out;
  out.names = s.names;
  out.values.resize(kept, s.variables());
  out.labels.assign(static_cast<std::size_t>(kept), 0);
  for (Index k = 0; k < kept; ++k) {
    const Index begin = k * factor;
    out.values.row(k) = s.values.row(begin);
    const Index end = std::min(begin + factor, s.length());
    for (Index t = begin; t < end; ++t) {
      if (s.labels[static_cast<std::size_t>(t)]) out.labels[static_cast<std::size_t>(k)] = 1;
    }
  }
  return out;
}

WindowSet::WindowSet(std::shared_ptr<const Matrix> values, Index width, std::vector<Index> ends,
                     Labels labels)
    : values_(std::move(values)), width_(width), ends_(std::move(ends)), labels_(std::move(labels)) {
  if (ends_.size() != labels_.size()) throw ShapeError("window ends/labels size mismatch");
  for (Index e : ends_) {
    if (e - width_ + 1 < 0 || e >= values_->rows()) throw ShapeError("window out of range");
  }
}

Matrix WindowSet::window(Index k) const {
  const Index end = end_index(k);
  return values_->middleRows(end - width_ + 1, width_);
}

std::vector<Matrix> WindowSet::gather(std::span<const Index> indices) const {
  std::vector<Matrix> out;
  out.reserve(indices.size());
  for (Index k : indices) out.push_back(window(k));
  return out;
}

std::vector<Matrix> WindowSet::all() const {
  std::vector<Matrix> out;
  out.reserve(ends_.size());
  for (Index k = 0; k < size(); ++k) out.push_back(window(k));
  return out;
}

WindowSet make_windows(const LabeledSeries& s, Index w) {
  s.validate();
  if (w < 2) throw ConfigError("window size must be >= 2 (forecasting needs a preceding step)");
  if (s.length() < w) {
    throw ConfigError("series of length " + std::to_string(s.length()) + " shorter than window " +
                      std::to_string(w));
  }
  const Index count = s.length() - w + 1;
  std::vector<Index> ends(static_cast<std::size_t>(count));
  Labels labels(static_cast<std::size_t>(count), 0);
  // Running count of anomalous steps inside the current window.
  Index inside = 0;
  for (Index t = 0; t < w - 1; ++t) inside += s.labels[static_cast<std::size_t>(t)];
  for (Index k = 0; k < count; ++k) {
    const Index end = k + w - 1;
    inside += s.labels[static_cast<std::size_t>(end)];
    ends[static_cast<std::size_t>(k)] = end;
    labels[static_cast<std::size_t>(k)] = inside > 0 ? 1 : 0;
    inside -= s.labels[static_cast<std::size_t>(k)];
  }
  return WindowSet(std::make_shared<const Matrix>(s.values), w, std::move(ends), std::move(labels));
}

}  // namespace carots::data
