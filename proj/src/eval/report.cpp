#include "carots/eval/report.hpp"

#include "carots/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace carots::eval {

const std::vector<std::string>& synthetic_variants() {
  static const std::vector<std::string> names{"PG", "PC", "CT", "CG"};
  return names;
}

RunReport per_type_report(std::uint64_t seed, const std::map<std::string, scoring::ScoreSeries>& scored,
                          const std::vector<std::string>& expected) {
  RunReport r;
  r.seed = seed;
  std::set<std::string> listed;
  auto add = [&](const std::string& name) {
    VariantResult v;
    v.name = name;
    const auto it = scored.find(name);
    if (it != scored.end()) v.metrics = compute_metrics(it->second.score, it->second.labels);
    r.variants.push_back(std::move(v));
    listed.insert(name);
  };
  for (const std::string& name : expected) {
    if (listed.count(name) != 0) throw ConfigError("variant '" + name + "' listed twice");
    add(name);
  }
  for (const auto& [name, series] : scored) {
    if (listed.count(name) == 0) add(name);
  }
  double sum = 0.0;
  int present = 0;
  for (const VariantResult& v : r.variants) {
    if (!v.metrics) continue;
    sum += v.metrics->auroc;
    ++present;
  }
  if (present > 0) r.average_auroc = sum / present;
  return r;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("mean/std of an empty list");
  MeanStd m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

MetricsReport aggregate(std::vector<RunReport> runs) {
  if (runs.empty()) throw ConfigError("no runs to aggregate");
  MetricsReport out;
  std::set<std::uint64_t> seen;
  for (const RunReport& r : runs) {
    if (!seen.insert(r.seed).second) throw ConfigError("seed " + std::to_string(r.seed) + " appears twice");
    if (r.variants.size() != runs.front().variants.size()) throw ConfigError("runs report different variants");
    for (std::size_t k = 0; k < r.variants.size(); ++k) {
      if (r.variants[k].name != runs.front().variants[k].name) throw ConfigError("runs report different variants");
    }
    out.seeds.push_back(r.seed);
  }
  for (std::size_t k = 0; k < runs.front().variants.size(); ++k) {
    MetricsReport::Row row;
    row.variant = runs.front().variants[k].name;
    row.present = std::all_of(runs.begin(), runs.end(), [k](const RunReport& r) { return r.variants[k].metrics.has_value(); });
    if (row.present) {
      std::vector<double> a;
      std::vector<double> p;
      std::vector<double> f;
      for (const RunReport& r : runs) {
        a.push_back(r.variants[k].metrics->auroc);
        p.push_back(r.variants[k].metrics->auprc);
        f.push_back(r.variants[k].metrics->best_f1);
      }
      row.auroc = mean_std(a);
      row.auprc = mean_std(p);
      row.best_f1 = mean_std(f);
    }
    out.rows.push_back(row);
  }
  if (std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.average_auroc.has_value(); })) {
    std::vector<double> avg;
    for (const RunReport& r : runs) avg.push_back(*r.average_auroc);
    out.average_auroc = mean_std(avg);
  }
  out.runs = std::move(runs);
  return out;
}

namespace {

nlohmann::json metric_json(const MetricSet& m) {
  return {{"auroc", m.auroc}, {"auprc", m.auprc}, {"best_f1", m.best_f1}, {"best_threshold", m.best_threshold}};
}

nlohmann::json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunReport& run : r.runs) {
    nlohmann::json variants = nlohmann::json::object();
    for (const VariantResult& v : run.variants) {
      variants[v.name] = v.metrics ? metric_json(*v.metrics) : nlohmann::json(nullptr);
    }
    runs.push_back({{"seed", run.seed},
                    {"variants", variants},
                    {"average_auroc", run.average_auroc ? nlohmann::json(*run.average_auroc) : nlohmann::json(nullptr)}});
  }
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (const auto& row : r.rows) {
    order.push_back(row.variant);
    if (!row.present) {
      summary[row.variant] = nullptr;
      continue;
    }
    summary[row.variant] = {{"auroc", mean_std_json(row.auroc)},
                            {"auprc", mean_std_json(row.auprc)},
                            {"best_f1", mean_std_json(row.best_f1)}};
  }
  return {{"seeds", r.seeds},
          {"variants", order},
          {"runs", runs},
          {"summary", summary},
          {"average_auroc", r.average_auroc ? mean_std_json(*r.average_auroc) : nlohmann::json(nullptr)}};
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  using data::format_double;
  out << "variant,seed,auroc,auprc,best_f1,best_threshold\n";
  for (const RunReport& run : r.runs) {
    for (const VariantResult& v : run.variants) {
      out << v.name << ',' << run.seed;
      if (v.metrics) {
        out << ',' << format_double(v.metrics->auroc) << ',' << format_double(v.metrics->auprc) << ','
            << format_double(v.metrics->best_f1) << ',' << format_double(v.metrics->best_threshold) << '\n';
      } else {
        out << ",,,,\n";
      }
    }
  }
  for (const auto& row : r.rows) {
    if (!row.present) continue;
    out << row.variant << ",mean," << format_double(row.auroc.mean) << ',' << format_double(row.auprc.mean) << ','
        << format_double(row.best_f1.mean) << ",\n";
    out << row.variant << ",std," << format_double(row.auroc.std) << ',' << format_double(row.auprc.std) << ','
        << format_double(row.best_f1.std) << ",\n";
  }
  for (const RunReport& run : r.runs) {
    if (run.average_auroc) out << "AVG," << run.seed << ',' << format_double(*run.average_auroc) << ",,,\n";
  }
  if (r.average_auroc) {
    out << "AVG,mean," << format_double(r.average_auroc->mean) << ",,,\n";
    out << "AVG,std," << format_double(r.average_auroc->std) << ",,,\n";
  }
}

}  // namespace carots::eval
