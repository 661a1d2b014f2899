#pragma once

#include "perseus/metrics.hpp"
#include "perseus/model.hpp"
#include "perseus/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace perseus {

struct SbmSpec {
  int n = 400;
  int blocks = 2;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 64;
  double flip_prob = 0.05;
};

struct DatasetSpec {
  enum class Kind { sbm, files };
  Kind kind = Kind::sbm;
  SbmSpec sbm;
  std::string edges, features, labels;  // kind == files
};

struct AttackSpec {
  enum class Kind { none, random, heterophily, import_record };
  Kind kind = Kind::heterophily;
  std::vector<double> rates{0.2};
  // kind == import_record: an externally perturbed graph plus its record;
  // features/labels fall back to the dataset's files when omitted.
  std::string edges, features, labels, record;
};

struct SplitSpec {
  double train = 0.1;
  double val = 0.1;
  double test = 0.8;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  AttackSpec attack;
  std::vector<Metric> metrics{Metric::glohom};
  SplitSpec split;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  bool baseline = true;    // also run the no-curriculum reference cells
  bool curriculum = true;  // cleared by --no-curriculum: plain cells only
  std::string out = "runs/out";
};

// Single JSON document; absent keys keep the defaults above, unknown keys are
// rejected. Schema (all optional):
//   dataset: {kind:"sbm"|"files", n, blocks, p_in, p_out, feature_dim,
//             flip_prob | edges, features, labels}
//   attack:  {kind:"none"|"random"|"heterophily"|"import", rates:[...],
//             edges, features, labels, record}
//   metrics: ["glo"|"cen"|"jac", ...]
//   split:   {train, val, test}
//   train:   {learning_rate, max_epochs_per_stage, dropout_rate, weight_decay,
//             hidden, patience, min_delta, warm_ratio, decay,
//             glohom:{alpha, mode:"exact"|"series", K}}
//   seeds: [...], baseline: bool, out: "dir"
ExperimentConfig load_config(const std::string& path);

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;  // replaces the seed list
  std::optional<Metric> metric;       // replaces the metric list
  bool no_curriculum = false;
};

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov);

// PERSEUS_THREADS when set (must be >= 1), else hardware_concurrency.
int worker_count();

// Short stable identifier used in file names and reports (glo/cen/jac/random).
std::string metric_tag(Metric m);

void cmd_score(const ExperimentConfig& cfg);
void cmd_attack(const ExperimentConfig& cfg);
void cmd_observe(const ExperimentConfig& cfg);
void cmd_run(const ExperimentConfig& cfg);
void cmd_report(const std::string& out_dir);

}  // namespace perseus
