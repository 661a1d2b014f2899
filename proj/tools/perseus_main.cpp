#include "perseus/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

using namespace perseus;

int main(int argc, char** argv) {
  CLI::App app{"Perseus: curriculum defense for graph convolutional networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string metric_name;
  CliOverrides ov;

  const auto add_common = [&](CLI::App* sub, bool with_metric,
                              bool with_seed) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& v) { ov.out = v; },
        "output directory (overrides config)");
    if (with_seed) {
      sub->add_option_function<std::uint64_t>(
          "--seed", [&](std::uint64_t v) { ov.seed = v; },
          "replace the seed list with a single seed");
    }
    if (with_metric) {
      sub->add_option_function<std::string>(
          "--metric", [&](const std::string& v) { metric_name = v; },
          "restrict to one metric (cen|jac|glo)");
    }
  };

  CLI::App* score =
      app.add_subcommand("score", "rank edges by difficulty, write CSVs");
  add_common(score, true, true);
  CLI::App* attack =
      app.add_subcommand("attack", "generate perturbed datasets + records");
  add_common(attack, false, true);
  CLI::App* observe = app.add_subcommand(
      "observe", "ranking-composition curves against a perturbation record");
  add_common(observe, true, true);
  CLI::App* run =
      app.add_subcommand("run", "train the (metric, rate, seed) grid");
  add_common(run, true, true);
  run->add_flag("--no-curriculum", ov.no_curriculum,
                "train the plain baseline only (all edges from epoch 0)");
  CLI::App* report =
      app.add_subcommand("report", "aggregate completed cells into a table");
  add_common(report, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!metric_name.empty()) ov.metric = metric_from_string(metric_name);
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    apply_overrides(cfg, ov);
    if (score->parsed()) {
      cmd_score(cfg);
    } else if (attack->parsed()) {
      cmd_attack(cfg);
    } else if (observe->parsed()) {
      cmd_observe(cfg);
    } else if (run->parsed()) {
      cmd_run(cfg);
    } else if (report->parsed()) {
      cmd_report(cfg.out);
    }
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
