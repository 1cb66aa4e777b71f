#include "carots/cli/app.hpp"

#include "carots/cli/pipeline.hpp"
#include "carots/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace carots::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  Index preview = 4;
  std::string score_mode;
  std::string distance;
  std::string format = "json";
  std::string kind = "hparam";
  std::optional<double> tau, alpha_start, alpha_end;
  std::optional<Index> epochs, batch_size;
};

ExperimentConfig effective_config(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (!o.distance.empty()) cfg.distance = o.distance;
  if (!o.score_mode.empty()) cfg.score_mode = scoring::parse_score_mode(o.score_mode);
  auto& t = cfg.contrastive;
  if (o.tau) t.soc.temperature = *o.tau;
  if (o.alpha_start) t.soc.alpha_start = *o.alpha_start;
  if (o.alpha_end) t.soc.alpha_end = *o.alpha_end;
  if (o.epochs) t.soc.epochs = *o.epochs;
  if (o.batch_size) t.batch_size = *o.batch_size;
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> seeds_of(const Options& o, const ExperimentConfig& cfg) {
  return o.seeds.empty() ? cfg.seeds : o.seeds;
}

void add_common(CLI::App* cmd, Options& o, bool with_seed) {
  cmd->add_option("-c,--config", o.config, "JSON experiment config (defaults when omitted)");
  cmd->add_option("-o,--out", o.out, std::string("Output root (default: config output, $") + kOutputRootEnv + ", ./carots-out)");
  if (with_seed) cmd->add_option("-s,--seed", o.seeds, "Seed(s) to run (default: every configured seed)");
  auto* g = "Contrastive overrides (part of the config hash)";
  cmd->add_option("--tau", o.tau, "Temperature")->group(g);
  cmd->add_option("--alpha-start", o.alpha_start, "Initial similarity threshold")->group(g);
  cmd->add_option("--alpha-end", o.alpha_end, "Final similarity threshold")->group(g);
  cmd->add_option("--epochs", o.epochs, "Encoder epochs")->group(g);
  cmd->add_option("--batch-size", o.batch_size, "Encoder batch size")->group(g);
}

void print_report(const eval::MetricsReport& r) {
  for (const auto& row : r.rows) {
    if (!row.present) {
      std::printf("%-6s absent\n", row.variant.c_str());
      continue;
    }
    std::printf("%-6s AUROC %.4f +- %.4f  AUPRC %.4f +- %.4f  F1 %.4f +- %.4f\n", row.variant.c_str(), row.auroc.mean,
                row.auroc.std, row.auprc.mean, row.auprc.std, row.best_f1.mean, row.best_f1.std);
  }
  if (r.average_auroc) std::printf("AVG    AUROC %.4f +- %.4f\n", r.average_auroc->mean, r.average_auroc->std);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Causality-aware contrastive anomaly detection for multivariate time series"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate (or import) the dataset splits");
  auto* discover = app.add_subcommand("discover", "Train the causal discoverer");
  auto* train = app.add_subcommand("train", "Train the contrastive encoder (needs discover)");
  auto* augment = app.add_subcommand("augment", "Preview CPA/CDA samples and check CDA validity");
  auto* score = app.add_subcommand("score", "Score the test splits");
  auto* report = app.add_subcommand("report", "Aggregate metrics over the configured seeds");
  auto* stability = app.add_subcommand("stability", "Causal-matrix similarity across training quarters");
  auto* sweep = app.add_subcommand("sweep", "Learning-rate/weight-decay grid or anomaly-difficulty sweep");
  auto* pipeline = app.add_subcommand("run", "gen, discover, train, augment, score and report in one go");
  auto* show = app.add_subcommand("config", "Print the effective config and its hash");

  for (auto* cmd : {gen, discover, train, augment, score, stability, sweep, pipeline}) add_common(cmd, o, true);
  add_common(report, o, false);
  add_common(show, o, false);

  augment->add_option("--preview", o.preview, "Number of training windows to preview")->check(CLI::NonNegativeNumber);
  const std::vector<std::string> modes{"ensemble", "cl-only", "cd-only"};
  for (auto* cmd : {score, report, sweep, pipeline}) {
    cmd->add_option("--score-mode", o.score_mode, "ensemble, cl-only or cd-only")->check(CLI::IsMember(modes));
  }
  for (auto* cmd : {score, sweep, pipeline}) {
    cmd->add_option("--distance", o.distance, "l2 or cosine")->check(CLI::IsMember({"l2", "cosine"}));
  }
  report->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--kind", o.kind, "hparam or difficulty")->check(CLI::IsMember({"hparam", "difficulty"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = effective_config(o);
    const Layout layout{output_root(cfg, o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out))};
    const auto seeds = seeds_of(o, cfg);
    const ReportFormat format = o.format == "csv" ? ReportFormat::csv : ReportFormat::json;

    if (*show) {
      std::cout << to_json(cfg).dump(2) << "\nconfig hash " << config_hash(cfg) << '\n';
    } else if (*gen) {
      for (auto s : seeds) cmd_gen(cfg, layout, s);
    } else if (*discover) {
      for (auto s : seeds) cmd_discover(cfg, layout, s);
    } else if (*train) {
      for (auto s : seeds) cmd_train(cfg, layout, s);
    } else if (*augment) {
      for (auto s : seeds) cmd_augment(cfg, layout, s, o.preview);
    } else if (*score) {
      for (auto s : seeds) cmd_score(cfg, layout, s, cfg.score_mode);
    } else if (*report) {
      print_report(cmd_report(cfg, layout, cfg.score_mode, format));
    } else if (*stability) {
      for (auto s : seeds) {
        for (const auto& p : cmd_stability(cfg, layout, s).pairs) {
          std::printf("seed %llu Q%dvsQ%d %.4f\n", static_cast<unsigned long long>(s), p.first, p.second, p.cosine);
        }
      }
    } else if (*sweep) {
      for (auto s : seeds) {
        if (o.kind == "hparam") {
          std::cout << cmd_sweep(cfg, layout, s).at("selected").dump() << '\n';
        } else {
          for (const auto& row : cmd_difficulty(cfg, layout, s, cfg.score_mode)) {
            std::printf("seed %llu factor %g", static_cast<unsigned long long>(s), row.factor);
            for (const auto& [name, a] : row.auroc) std::printf("  %s %.4f", name.c_str(), a);
            std::printf("\n");
          }
        }
      }
    } else if (*pipeline) {
      for (auto s : seeds) {
        cmd_gen(cfg, layout, s);
        cmd_discover(cfg, layout, s);
        cmd_train(cfg, layout, s);
        cmd_augment(cfg, layout, s, o.preview);
        cmd_score(cfg, layout, s, cfg.score_mode);
      }
      if (o.seeds.empty()) print_report(cmd_report(cfg, layout, cfg.score_mode, format));
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace carots::cli
