// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance [work-dir]
//
// Desk-scale runs go through the same stage functions as the CLI and leave
// their artifacts under work-dir.

#include "gradient_check.hpp"
#include "oracles.hpp"

#include "carots/causal/causal_model.hpp"
#include "carots/cli/app.hpp"
#include "carots/cli/pipeline.hpp"
#include "carots/contrastive/soc.hpp"
#include "carots/contrastive/trainer.hpp"
#include "carots/eval/metrics.hpp"
#include "carots/synthgen/systems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace carots;
using namespace carots::cli;
using nnet::Index;
using nnet::Matrix;

namespace {

#ifndef CAROTS_SOURCE_DIR
#define CAROTS_SOURCE_DIR "."
#endif

constexpr double kRunBudgetSeconds = 15.0 * 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix random_matrix(Index r, Index c, nnet::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

// ---- 1: gradients ---------------------------------------------------------------

Outcome gradient_correctness() {
  nnet::Rng rng(101);
  double worst_causal = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    causal::CausalConfig cfg;
    cfg.window = 2 + draw % 3;
    cfg.hidden = 3 + draw % 4;
    cfg.lambda_sparse = 0.05;
    cfg.weight_ridge = 0.01;
    const Index n = 2 + draw % 3;
    causal::CausalModel model(n, cfg, rng);
    model.params().at(causal::CausalModel::kGateLogits).value = random_matrix(n, n, rng);
    std::vector<Matrix> windows;
    for (int b = 0; b < 6; ++b) windows.push_back(random_matrix(cfg.window, n, rng));
    Matrix inputs;
    Matrix targets;
    causal::split_windows(windows, inputs, targets);
    auto with_grad = [&](nnet::ParamSet& ps) {
      nnet::Tape tape;
      nnet::Binding bound(tape, ps);
      nnet::Var loss = model.objective(bound, inputs, targets);
      tape.backward(loss);
      return loss.scalar();
    };
    auto value_only = [&](nnet::ParamSet&) { return model.objective_value(inputs, targets); };
    worst_causal = std::max(worst_causal, testing::check_gradients(model.params(), with_grad, value_only).relative_error);
  }

  double worst_soc = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    contrastive::EncoderConfig cfg;
    cfg.hidden = 4;
    cfg.embedding = 3;
    cfg.kind = draw % 4 == 3 ? contrastive::EncoderKind::mlp : contrastive::EncoderKind::gru;
    contrastive::EncoderModel model(3, 2, cfg, rng);
    for (auto& [name, p] : model.params()) p.value *= 3.0;
    const Index b = 2 + draw % 2;
    std::vector<Matrix> windows;
    for (Index k = 0; k < 4 * b; ++k) windows.push_back(random_matrix(3, 2, rng));
    const double alpha = draw % 2 == 0 ? 0.2 : 0.5;
    const double tau = draw % 3 == 0 ? 0.1 : 0.5;
    const auto sets =
        contrastive::evaluate_soc(contrastive::scaled_similarity(model.encode_batch(windows), tau), alpha, tau, true)
            .positives;
    auto with_grad = [&](nnet::ParamSet& ps) {
      nnet::Tape tape;
      nnet::Binding bound(tape, ps);
      nnet::Var loss = contrastive::soc_loss(model.embed(bound, windows), alpha, tau, true);
      tape.backward(loss);
      return loss.scalar();
    };
    // Same loss with the filter sets of the unperturbed pass held fixed.
    auto value_only = [&](nnet::ParamSet&) {
      const Matrix e = model.encode_batch(windows);
      double loss = 0.0;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        const Index a = static_cast<Index>(i);
        auto s = [&](Index j) { return e.row(a).dot(e.row(j)) / (e.row(a).norm() * e.row(j).norm()) / tau; };
        double anchor = 0.0;
        for (Index j : sets[i]) {
          double denom = std::exp(s(j));
          for (Index k : sets[i]) denom += std::exp(s(k + 2 * b));
          anchor -= s(j) - std::log(denom);
        }
        loss += anchor / static_cast<double>(sets[i].size());
      }
      return loss / static_cast<double>(2 * b);
    };
    worst_soc = std::max(worst_soc, testing::check_gradients(model.params(), with_grad, value_only).relative_error);
  }
  return {worst_causal < 1e-4 && worst_soc < 1e-4, "max relative error: causal objective " +
                                                       fmt("%.2e", worst_causal) + ", SOC loss " +
                                                       fmt("%.2e", worst_soc) + " (20 draws each)"};
}

// ---- 2: oracles -----------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_metric = 0.0;
  bool thresholds_match = true;
  int metric_instances = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + static_cast<int>(u(rng) * 199.0);
    const bool tied = trial % 2 == 0;
    const int levels = 1 + static_cast<int>(u(rng) * 6.0);
    const double prevalence = 0.05 + 0.9 * u(rng);
    std::vector<double> s;
    data::Labels l;
    for (int k = 0; k < n; ++k) {
      s.push_back(tied ? std::floor(u(rng) * levels) : u(rng) * 10.0 - 5.0);
      l.push_back(u(rng) < prevalence ? 1 : 0);
    }
    l[0] = 1;
    l[1] = 0;
    worst_metric = std::max(worst_metric, std::abs(eval::auroc(s, l) - testing::brute_auroc(s, l)));
    worst_metric = std::max(worst_metric, std::abs(eval::auprc(s, l) - testing::brute_auprc(s, l)));
    const eval::BestF1 fast = eval::best_f1(s, l);
    const eval::BestF1 slow = testing::brute_best_f1(s, l);
    worst_metric = std::max(worst_metric, std::abs(fast.f1 - slow.f1));
    thresholds_match = thresholds_match && fast.threshold == slow.threshold;
    ++metric_instances;
  }

  nnet::Rng erng(203);
  double worst_soc = 0.0;
  bool sets_match = true;
  int soc_instances = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Index b = 1 + trial % 12;
    Matrix e = random_matrix(4 * b, 2 + trial % 4, erng);
    if (trial % 5 == 0 && b > 1) e.row(1) = e.row(0);
    const double alpha = -0.3 + 1.3 * (static_cast<double>(trial % 13) / 12.0);
    const double tau = trial % 2 == 0 ? 0.1 : 0.5;
    const bool self = trial % 7 != 0;
    const testing::Brute expect = testing::brute_soc(e, alpha, tau, self);
    const auto got = contrastive::evaluate_soc(contrastive::scaled_similarity(e, tau), alpha, tau, self);
    nnet::Tape tape;
    const double taped = contrastive::soc_loss(tape.constant(e), alpha, tau, self).scalar();
    const double scale = std::max(1.0, std::abs(expect.loss));
    worst_soc = std::max({worst_soc, std::abs(got.loss - expect.loss) / scale, std::abs(taped - expect.loss) / scale});
    sets_match = sets_match && got.positives == expect.positives;
    ++soc_instances;
  }
  const bool pass = worst_metric <= 1e-10 && thresholds_match && worst_soc <= 1e-10 && sets_match;
  return {pass, "metrics: max deviation " + fmt("%.1e", worst_metric) + " on " + std::to_string(metric_instances) +
                    " instances, thresholds " + (thresholds_match ? "identical" : "differ") + "; SOC: max deviation " +
                    fmt("%.1e", worst_soc) + " on " + std::to_string(soc_instances) + " batches, filter sets " +
                    (sets_match ? "identical" : "differ")};
}

// ---- 3: causal structure ------------------------------------------------------------

Outcome structure_recovery() {
  const double start = cpu_seconds();
  synth::Lorenz96Config lc;
  lc.variables = 10;
  lc.length = 2000;
  lc.seed = 0;
  const data::LabeledSeries s = synth::generate_lorenz96(lc);
  const auto [train, val] = data::split_train_val(s, 0.2, 2);
  const data::NormStats st = data::fit_norm_stats(train);
  const data::WindowSet tw = data::make_windows(data::znormalize(train, st), 2);
  const data::WindowSet vw = data::make_windows(data::znormalize(val, st), 2);
  causal::CausalConfig cfg;
  cfg.window = 2;
  const causal::CausalTrainResult r = causal::train_causal_discoverer(tw, cfg, &vw);
  const double a = testing::pair_auroc(r.model.gates(), synth::lorenz96_ground_truth(10));
  const double secs = cpu_seconds() - start;
  return {a >= 0.85 && secs < 300.0, "edge AUROC " + fmt("%.4f", a) + " (>= 0.85), " + fmt("%.0f", secs) + " s CPU"};
}

// ---- desk-scale runs ------------------------------------------------------------------

const std::vector<scoring::ScoreMode> kModes = {scoring::ScoreMode::ensemble, scoring::ScoreMode::cl_only,
                                                scoring::ScoreMode::cd_only};

struct DeskSeed {
  std::uint64_t seed = 0;
  double cpu = 0.0;
  double ratio_first = 0.0;
  double ratio_last = 0.0;
  double median_original = 0.0;
  double median_disturbed = 0.0;
};

struct DeskSuite {
  std::string name;
  std::vector<DeskSeed> seeds;
  std::map<scoring::ScoreMode, eval::MetricsReport> reports;

  double mean_auroc(scoring::ScoreMode mode, const std::string& variant) const {
    for (const auto& row : reports.at(mode).rows) {
      if (row.variant == variant && row.present) return row.auroc.mean;
    }
    return std::nan("");
  }
};

void copy_stage(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

// Runs every configured seed. With `upstream`, gen and discover outputs are
// reused from that root; their manifests are still checked against cfg.
DeskSuite run_suite(const std::string& name, const ExperimentConfig& cfg, const Layout& layout,
                    const Layout* upstream = nullptr) {
  DeskSuite suite;
  suite.name = name;
  for (std::uint64_t seed : cfg.seeds) {
    DeskSeed ds;
    ds.seed = seed;
    const double start = cpu_seconds();
    if (upstream != nullptr) {
      copy_stage(upstream->data_dir(seed), layout.data_dir(seed));
      copy_stage(upstream->causal_dir(seed), layout.causal_dir(seed));
    } else {
      cmd_gen(cfg, layout, seed);
      cmd_discover(cfg, layout, seed);
    }
    cmd_train(cfg, layout, seed);
    cmd_augment(cfg, layout, seed, 0);
    cmd_score(cfg, layout, seed, scoring::ScoreMode::ensemble);
    ds.cpu = cpu_seconds() - start;
    for (auto mode : kModes) {
      if (mode != scoring::ScoreMode::ensemble) cmd_score(cfg, layout, seed, mode);
    }
    const auto enc = read_json(layout.encoder_dir(seed) / kManifestFile);
    ds.ratio_first = enc.at("unfiltered_ratio_first").get<double>();
    ds.ratio_last = enc.at("unfiltered_ratio_last").get<double>();
    const auto aug = read_json(layout.augment_dir(seed) / kManifestFile).at("cda_validity");
    ds.median_original = aug.at("median_a_cd_original").get<double>();
    ds.median_disturbed = aug.at("median_a_cd_disturbed").get<double>();
    std::printf("  %s seed %llu: %.0f s CPU, unfiltered ratio %.3f -> %.3f, median A_CD %.4f -> %.4f\n", name.c_str(),
                static_cast<unsigned long long>(seed), ds.cpu, ds.ratio_first, ds.ratio_last, ds.median_original,
                ds.median_disturbed);
    std::fflush(stdout);
    suite.seeds.push_back(ds);
  }
  for (auto mode : kModes) suite.reports[mode] = cmd_report(cfg, layout, mode, ReportFormat::json);
  for (auto mode : kModes) {
    std::printf("  %s %-8s", name.c_str(), scoring::to_string(mode).c_str());
    for (const auto& row : suite.reports.at(mode).rows) {
      std::printf("  %s %.4f+-%.4f", row.variant.c_str(), row.auroc.mean, row.auroc.std);
    }
    std::printf("\n");
  }
  std::fflush(stdout);
  return suite;
}

double max_cpu(const DeskSuite& s) {
  double m = 0.0;
  for (const auto& d : s.seeds) m = std::max(m, d.cpu);
  return m;
}

Outcome desk_reproduction(const DeskSuite& lorenz, const DeskSuite& var) {
  const double pg = lorenz.mean_auroc(scoring::ScoreMode::ensemble, "PG");
  const double pc = lorenz.mean_auroc(scoring::ScoreMode::ensemble, "PC");
  const double cg = var.mean_auroc(scoring::ScoreMode::ensemble, "CG");
  const double slowest = std::max(max_cpu(lorenz), max_cpu(var));
  const bool pass = pg >= 0.90 && pc >= 0.85 && cg >= 0.90 && slowest < kRunBudgetSeconds &&
                    lorenz.seeds.size() == 3 && var.seeds.size() == 3;
  return {pass, "Lorenz96 PG " + fmt("%.4f", pg) + " (>= 0.90), PC " + fmt("%.4f", pc) + " (>= 0.85); VAR CG " +
                    fmt("%.4f", cg) + " (>= 0.90); slowest run " + fmt("%.0f", slowest) + " s CPU; 3 seeds"};
}

Outcome ablation_direction(const DeskSuite& lorenz, const DeskSuite& no_filter) {
  const double full = lorenz.mean_auroc(scoring::ScoreMode::ensemble, "PG");
  const double unfiltered = no_filter.mean_auroc(scoring::ScoreMode::ensemble, "PG");
  const double cl = lorenz.mean_auroc(scoring::ScoreMode::cl_only, "PG");
  const double cd = lorenz.mean_auroc(scoring::ScoreMode::cd_only, "PG");
  const bool a = unfiltered <= full;
  const bool b = cl - cd >= 0.02 && full - cd >= 0.02;
  return {a && b, std::string("(a) ") + (a ? "holds" : "fails") + ": alpha=-1 PG " + fmt("%.4f", unfiltered) +
                      " vs filtered " + fmt("%.4f", full) + "; (b) " + (b ? "holds" : "fails") + ": cl-only " +
                      fmt("%.4f", cl) + ", ensemble " + fmt("%.4f", full) + ", cd-only " + fmt("%.4f", cd) +
                      " (need margin >= 0.02)"};
}

Outcome ratio_trend(const std::vector<const DeskSuite*>& suites) {
  bool pass = true;
  std::string detail;
  for (const DeskSuite* s : suites) {
    for (const DeskSeed& d : s->seeds) {
      pass = pass && d.ratio_last > d.ratio_first;
      detail += (detail.empty() ? "" : ", ") + s->name + "/" + std::to_string(d.seed) + " " +
                fmt("%.3f", d.ratio_first) + "->" + fmt("%.3f", d.ratio_last);
    }
  }
  return {pass, "unfiltered ratio first->last epoch: " + detail};
}

Outcome cda_validity(const std::vector<const DeskSuite*>& suites) {
  bool pass = true;
  std::string detail;
  for (const DeskSuite* s : suites) {
    for (const DeskSeed& d : s->seeds) {
      pass = pass && d.median_disturbed > d.median_original;
      detail += (detail.empty() ? "" : ", ") + s->name + "/" + std::to_string(d.seed) + " " +
                fmt("%.4f", d.median_original) + "<" + fmt("%.4f", d.median_disturbed);
    }
  }
  return {pass, "median A_CD original<disturbed: " + detail};
}

// ---- 8: determinism ---------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work) {
  ExperimentConfig cfg = load_config(fs::path(CAROTS_SOURCE_DIR) / "configs" / "desk_lorenz.json");
  nlohmann::json j = to_json(cfg);
  j["seeds"] = {0};
  const fs::path config_path = work / "determinism.json";
  write_json(config_path, j);
  const fs::path roots[2] = {work / "determinism-a", work / "determinism-b"};
  for (const fs::path& root : roots) {
    fs::remove_all(root);
    std::vector<std::string> args = {"carots", "run", "-c", config_path.string(), "-o", root.string()};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    const int rc = cli::run(static_cast<int>(argv.size()), argv.data());
    if (rc != 0) return {false, "pipeline exited with " + std::to_string(rc)};
  }
  Index files = 0;
  Index differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(roots[0])) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), roots[0]);
    ++files;
    if (!fs::exists(roots[1] / rel) || slurp(entry.path()) != slurp(roots[1] / rel)) {
      if (differing++ == 0) first_diff = rel.string();
    }
  }
  Index files_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(roots[1])) files_b += entry.is_regular_file() ? 1 : 0;
  const bool pass = differing == 0 && files == files_b && files > 0;
  return {pass, std::to_string(files) + " files compared, " + std::to_string(differing) + " differ" +
                    (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

void report(int id, const std::string& title, const Outcome& o, int& failures) {
  std::printf("CRITERION %d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "carots-acceptance";
  fs::create_directories(work);
  int failures = 0;
  try {
    report(1, "gradient correctness", gradient_correctness(), failures);
    report(2, "oracle equivalence", oracle_equivalence(), failures);
    report(3, "causal structure recovery", structure_recovery(), failures);

    const fs::path configs = fs::path(CAROTS_SOURCE_DIR) / "configs";
    const ExperimentConfig lorenz_cfg = load_config(configs / "desk_lorenz.json");
    const ExperimentConfig var_cfg = load_config(configs / "desk_var.json");
    const ExperimentConfig no_filter_cfg = load_config(configs / "desk_lorenz_no_filter.json");
    const Layout lorenz_layout{work / "desk-lorenz"};
    const Layout var_layout{work / "desk-var"};
    const Layout no_filter_layout{work / "desk-lorenz-no-filter"};
    for (const Layout* l : {&lorenz_layout, &var_layout, &no_filter_layout}) fs::remove_all(l->root);

    const DeskSuite lorenz = run_suite("lorenz", lorenz_cfg, lorenz_layout);
    const DeskSuite var = run_suite("var", var_cfg, var_layout);
    const DeskSuite no_filter = run_suite("lorenz-alpha-1", no_filter_cfg, no_filter_layout, &lorenz_layout);

    report(4, "desk-scale detection", desk_reproduction(lorenz, var), failures);
    report(5, "ablation directions", ablation_direction(lorenz, no_filter), failures);
    report(6, "unfiltered ratio trend", ratio_trend({&lorenz, &var}), failures);
    report(7, "CDA validity", cda_validity({&lorenz, &var}), failures);
    report(8, "determinism", determinism(work), failures);
  } catch (const std::exception& e) {
    std::printf("ABORTED: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
