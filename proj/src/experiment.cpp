#include "perseus/experiment.hpp"

#include "perseus/attacks.hpp"
#include "perseus/detail/text.hpp"
#include "perseus/graph.hpp"
#include "perseus/io_formats.hpp"
#include "perseus/observation.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace perseus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      throw usage_error("config: unknown key \"" + item.key() + "\" in " +
                        where);
    }
  }
}

template <class T>
void read_key(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec d;
  check_keys(j, "dataset",
             {"kind", "n", "blocks", "p_in", "p_out", "feature_dim",
              "flip_prob", "edges", "features", "labels"});
  std::string kind = "sbm";
  read_key(j, "kind", kind);
  if (kind == "sbm") {
    d.kind = DatasetSpec::Kind::sbm;
    read_key(j, "n", d.sbm.n);
    read_key(j, "blocks", d.sbm.blocks);
    read_key(j, "p_in", d.sbm.p_in);
    read_key(j, "p_out", d.sbm.p_out);
    read_key(j, "feature_dim", d.sbm.feature_dim);
    read_key(j, "flip_prob", d.sbm.flip_prob);
  } else if (kind == "files") {
    d.kind = DatasetSpec::Kind::files;
    read_key(j, "edges", d.edges);
    read_key(j, "features", d.features);
    read_key(j, "labels", d.labels);
    if (d.edges.empty() || d.features.empty()) {
      throw usage_error("config: files dataset needs edges and features paths");
    }
  } else {
    throw usage_error("config: dataset kind must be \"sbm\" or \"files\"");
  }
  return d;
}

AttackSpec parse_attack(const json& j) {
  AttackSpec a;
  check_keys(j, "attack",
             {"kind", "rates", "edges", "features", "labels", "record"});
  std::string kind = "heterophily";
  read_key(j, "kind", kind);
  if (kind == "none") {
    a.kind = AttackSpec::Kind::none;
  } else if (kind == "random") {
    a.kind = AttackSpec::Kind::random;
  } else if (kind == "heterophily") {
    a.kind = AttackSpec::Kind::heterophily;
  } else if (kind == "import") {
    a.kind = AttackSpec::Kind::import_record;
    read_key(j, "edges", a.edges);
    read_key(j, "features", a.features);
    read_key(j, "labels", a.labels);
    read_key(j, "record", a.record);
    if (a.edges.empty() || a.record.empty()) {
      throw usage_error(
          "config: import attack needs edges and record paths");
    }
  } else {
    throw usage_error("config: attack kind must be none, random, "
                      "heterophily, or import");
  }
  if (j.contains("rates")) {
    a.rates = j.at("rates").get<std::vector<double>>();
  }
  for (double r : a.rates) {
    if (!(r > 0.0) || r > 1.0) {
      throw usage_error("config: attack rates must lie in (0,1]");
    }
  }
  if (a.rates.empty()) throw usage_error("config: attack rates are empty");
  return a;
}

TrainConfig parse_train(const json& j, TrainConfig t) {
  check_keys(j, "train",
             {"learning_rate", "max_epochs_per_stage", "dropout_rate",
              "weight_decay", "hidden", "patience", "min_delta", "warm_ratio",
              "decay", "glohom"});
  read_key(j, "learning_rate", t.learning_rate);
  read_key(j, "max_epochs_per_stage", t.max_epochs_per_stage);
  read_key(j, "dropout_rate", t.dropout_rate);
  read_key(j, "weight_decay", t.weight_decay);
  read_key(j, "hidden", t.hidden);
  read_key(j, "patience", t.patience);
  read_key(j, "min_delta", t.min_delta);
  read_key(j, "warm_ratio", t.warm_ratio);
  read_key(j, "decay", t.decay);
  if (j.contains("glohom")) {
    const json& g = j.at("glohom");
    check_keys(g, "train.glohom", {"alpha", "mode", "K"});
    read_key(g, "alpha", t.glohom.alpha);
    read_key(g, "K", t.glohom.K);
    if (g.contains("mode")) {
      const std::string mode = g.at("mode").get<std::string>();
      if (mode == "exact") {
        t.glohom.mode = GloHomConfig::Mode::exact;
      } else if (mode == "series") {
        t.glohom.mode = GloHomConfig::Mode::series;
      } else {
        throw usage_error("config: glohom mode must be exact or series");
      }
    }
  }
  return t;
}

std::string rate_label(double rate) { return detail::fmt_real(rate); }

Graph acquire_clean(const ExperimentConfig& cfg, std::uint64_t seed) {
  Graph g;
  if (cfg.dataset.kind == DatasetSpec::Kind::sbm) {
    const SbmSpec& s = cfg.dataset.sbm;
    g = sbm_generate(s.n, s.blocks, s.p_in, s.p_out, s.feature_dim,
                     s.flip_prob, seed);
  } else {
    g = load_graph(cfg.dataset.edges, cfg.dataset.features,
                   cfg.dataset.labels);
  }
  return largest_connected_component(g).graph;
}

struct AttackedCell {
  Graph graph;
  PerturbationRecord rec;
};

AttackedCell acquire_attacked(const ExperimentConfig& cfg, double rate,
                              std::uint64_t seed) {
  switch (cfg.attack.kind) {
    case AttackSpec::Kind::none: {
      AttackedCell c;
      c.graph = acquire_clean(cfg, seed);
      return c;
    }
    case AttackSpec::Kind::random: {
      auto [g, rec] = random_flip_attack(acquire_clean(cfg, seed), rate, seed);
      return {std::move(g), std::move(rec)};
    }
    case AttackSpec::Kind::heterophily: {
      auto [g, rec] = heterophily_attack(acquire_clean(cfg, seed), rate, seed);
      return {std::move(g), std::move(rec)};
    }
    case AttackSpec::Kind::import_record: {
      const std::string feats = !cfg.attack.features.empty()
                                    ? cfg.attack.features
                                    : cfg.dataset.features;
      const std::string labels = !cfg.attack.labels.empty()
                                     ? cfg.attack.labels
                                     : cfg.dataset.labels;
      if (feats.empty()) {
        throw usage_error("import attack: no features path available");
      }
      AttackedCell c;
      c.graph = load_graph(cfg.attack.edges, feats, labels);
      c.rec = load_record(cfg.attack.record);
      return c;
    }
  }
  throw validation_error("unreachable attack kind");
}

// The rate grid the cell loops iterate over; "none" collapses to a single
// clean pseudo-rate, "import" takes the record's rate.
std::vector<double> effective_rates(const ExperimentConfig& cfg) {
  switch (cfg.attack.kind) {
    case AttackSpec::Kind::none:
      return {0.0};
    case AttackSpec::Kind::import_record:
      return {load_record(cfg.attack.record).rate};
    default:
      return cfg.attack.rates;
  }
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  detail::write_file(tmp.string(), content);
  fs::rename(tmp, path);
}

// ---- report ------------------------------------------------------------

struct CellRow {
  std::string metric;  // tag or "plain"
  double rate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double test_acc = 0;
  std::string error;
};

struct Aggregate {
  std::string metric;
  double rate = 0;
  int n = 0;
  double mean = 0;
  double stddev = 0;
};

int metric_order(const std::string& tag) {
  if (tag == "glo") return 0;
  if (tag == "cen") return 1;
  if (tag == "jac") return 2;
  if (tag == "random") return 3;
  if (tag == "plain") return 5;
  return 4;
}

std::vector<CellRow> collect_cells(const fs::path& out_dir) {
  std::vector<CellRow> rows;
  const fs::path cells = out_dir / "cells";
  if (fs::exists(cells)) {
    for (const auto& entry : fs::recursive_directory_iterator(cells)) {
      if (!entry.is_regular_file() ||
          entry.path().filename() != "result.json") {
        continue;
      }
      json j;
      try {
        std::ifstream in(entry.path());
        in >> j;
      } catch (...) {
        continue;  // partial write; treated as missing
      }
      CellRow row;
      row.metric = j.value("metric", std::string("?"));
      row.rate = j.value("rate", 0.0);
      row.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("test_acc")) {
        row.ok = true;
        row.test_acc = j["test_acc"].get<double>();
      } else {
        row.error = j.value("error", std::string("unknown failure"));
      }
      rows.push_back(std::move(row));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const CellRow& a, const CellRow& b) {
    return std::tuple(metric_order(a.metric), a.metric, a.rate, a.seed) <
           std::tuple(metric_order(b.metric), b.metric, b.rate, b.seed);
  });
  return rows;
}

std::vector<Aggregate> aggregate_cells(const std::vector<CellRow>& rows) {
  std::vector<Aggregate> out;
  for (const auto& row : rows) {
    if (!row.ok) continue;
    if (out.empty() || out.back().metric != row.metric ||
        out.back().rate != row.rate) {
      out.push_back({row.metric, row.rate, 0, 0, 0});
    }
    ++out.back().n;
    out.back().mean += row.test_acc;  // sum for now
  }
  for (auto& a : out) a.mean /= a.n;
  for (auto& a : out) {
    double ss = 0;
    for (const auto& row : rows) {
      if (row.ok && row.metric == a.metric && row.rate == a.rate) {
        ss += (row.test_acc - a.mean) * (row.test_acc - a.mean);
      }
    }
    a.stddev = a.n > 1 ? std::sqrt(ss / (a.n - 1)) : 0.0;
  }
  return out;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render_report_text(const std::vector<CellRow>& rows,
                               const std::vector<Aggregate>& aggs) {
  std::vector<double> rates;
  std::vector<std::string> metrics;
  for (const auto& row : rows) {
    if (std::find(rates.begin(), rates.end(), row.rate) == rates.end()) {
      rates.push_back(row.rate);
    }
    if (std::find(metrics.begin(), metrics.end(), row.metric) ==
        metrics.end()) {
      metrics.push_back(row.metric);
    }
  }
  std::sort(rates.begin(), rates.end());
  // rows arrive sorted, so `metrics` is already in canonical order

  const auto cell_text = [&](const std::string& metric,
                             double rate) -> std::string {
    for (const auto& a : aggs) {
      if (a.metric == metric && a.rate == rate) {
        return fixed4(a.mean) + "±" + fixed4(a.stddev);
      }
    }
    return "*";
  };

  std::size_t width = 13;
  for (const auto& m : metrics) width = std::max(width, m.size() + 2);
  std::ostringstream out;
  out << "test accuracy (mean±std over seeds)\n";
  out << std::string(width, ' ');
  for (double r : rates) {
    std::string head = "rate " + rate_label(r);
    out << head << std::string(head.size() < 16 ? 16 - head.size() : 1, ' ');
  }
  out << '\n';
  for (const auto& m : metrics) {
    out << m << std::string(width - m.size(), ' ');
    for (double r : rates) {
      std::string c = cell_text(m, r);
      out << c << std::string(c.size() < 16 ? 16 - c.size() : 1, ' ');
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const fs::path& out_dir, bool to_stdout) {
  const auto rows = collect_cells(out_dir);
  if (rows.empty()) {
    throw usage_error("report: no completed cells under " +
                      (out_dir / "cells").string());
  }
  const auto aggs = aggregate_cells(rows);

  json jcells = json::array();
  for (const auto& row : rows) {
    json j{{"metric", row.metric}, {"rate", row.rate}, {"seed", row.seed}};
    if (row.ok) {
      j["test_acc"] = row.test_acc;
    } else {
      j["error"] = row.error;
    }
    jcells.push_back(std::move(j));
  }
  json jaggs = json::array();
  for (const auto& a : aggs) {
    jaggs.push_back(json{{"metric", a.metric},
                         {"rate", a.rate},
                         {"n", a.n},
                         {"mean", a.mean},
                         {"std", a.stddev}});
  }
  atomic_write(out_dir / "report.json",
               json{{"cells", jcells}, {"aggregates", jaggs}}.dump(2) + "\n");

  std::ostringstream csv;
  csv << "metric,rate,n,mean,std\n";
  for (const auto& a : aggs) {
    csv << a.metric << ',' << detail::fmt_real(a.rate) << ',' << a.n << ','
        << detail::fmt_real(a.mean) << ',' << detail::fmt_real(a.stddev)
        << '\n';
  }
  atomic_write(out_dir / "report.csv", csv.str());

  const std::string text = render_report_text(rows, aggs);
  atomic_write(out_dir / "report.txt", text);
  if (to_stdout) std::cout << text;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw usage_error("config " + path + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    check_keys(j, "top level",
               {"dataset", "attack", "metrics", "split", "train", "seeds",
                "baseline", "out"});
    if (j.contains("dataset")) cfg.dataset = parse_dataset(j["dataset"]);
    if (j.contains("attack")) cfg.attack = parse_attack(j["attack"]);
    if (j.contains("metrics")) {
      cfg.metrics.clear();
      for (const auto& name : j["metrics"]) {
        cfg.metrics.push_back(metric_from_string(name.get<std::string>()));
      }
      if (cfg.metrics.empty()) throw usage_error("config: metrics are empty");
    }
    if (j.contains("split")) {
      const json& s = j["split"];
      check_keys(s, "split", {"train", "val", "test"});
      read_key(s, "train", cfg.split.train);
      read_key(s, "val", cfg.split.val);
      read_key(s, "test", cfg.split.test);
      if (std::abs(cfg.split.train + cfg.split.val + cfg.split.test - 1.0) >
          1e-9) {
        throw usage_error("config: split ratios must sum to 1");
      }
    }
    if (j.contains("train")) cfg.train = parse_train(j["train"], cfg.train);
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      if (cfg.seeds.empty()) throw usage_error("config: seeds are empty");
    }
    read_key(j, "baseline", cfg.baseline);
    read_key(j, "out", cfg.out);
  } catch (const json::exception& e) {
    throw usage_error("config " + path + ": " + e.what());
  }
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
  if (ov.out) cfg.out = *ov.out;
  if (ov.seed) cfg.seeds = {*ov.seed};
  if (ov.metric) cfg.metrics = {*ov.metric};
  if (ov.no_curriculum) cfg.curriculum = false;
}

int worker_count() {
  if (const char* env = std::getenv("PERSEUS_THREADS")) {
    const long long v = detail::parse_int(env, "PERSEUS_THREADS");
    if (v < 1) throw usage_error("PERSEUS_THREADS must be >= 1");
    return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::string metric_tag(Metric m) {
  switch (m) {
    case Metric::centrality: return "cen";
    case Metric::jaccard: return "jac";
    case Metric::glohom: return "glo";
    case Metric::random_baseline: return "random";
  }
  throw validation_error("unknown metric");
}

void cmd_score(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.seeds.front();
  const double rate = effective_rates(cfg).front();
  const AttackedCell cell = acquire_attacked(cfg, rate, seed);
  fs::create_directories(cfg.out);
  for (Metric m : cfg.metrics) {
    const EdgeScoreTable table =
        score_edges(cell.graph, m, cfg.train.glohom, 0.0, seed);
    const fs::path path =
        fs::path(cfg.out) / ("scores_" + metric_tag(m) + ".csv");
    save_scores(path.string(), table);
    std::cout << "wrote " << path.string() << " (" << table.ranking.size()
              << " edges)\n";
  }
}

void cmd_attack(const ExperimentConfig& cfg) {
  if (cfg.attack.kind == AttackSpec::Kind::none ||
      cfg.attack.kind == AttackSpec::Kind::import_record) {
    throw usage_error(
        "attack subcommand needs a generating attack kind "
        "(random or heterophily)");
  }
  for (double rate : cfg.attack.rates) {
    for (std::uint64_t seed : cfg.seeds) {
      const AttackedCell cell = acquire_attacked(cfg, rate, seed);
      const fs::path dir = fs::path(cfg.out) / "attacks" /
                           ("rate_" + rate_label(rate)) /
                           ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      save_graph(cell.graph, (dir / "edges.tsv").string(),
                 (dir / "features.csv").string(),
                 cell.graph.has_labels() ? (dir / "labels.csv").string() : "");
      save_record((dir / "record.json").string(), cell.rec);
      std::cout << "wrote " << dir.string() << " (+"
                << cell.rec.added.size() << " edges)\n";
    }
  }
}

void cmd_observe(const ExperimentConfig& cfg) {
  if (cfg.attack.kind == AttackSpec::Kind::none) {
    throw usage_error("observe needs an attack record (kind is none)");
  }
  std::ostringstream aucs;
  aucs << "rate,seed,metric,auc\n";
  for (double rate : effective_rates(cfg)) {
    for (std::uint64_t seed : cfg.seeds) {
      const AttackedCell cell = acquire_attacked(cfg, rate, seed);
      const fs::path dir = fs::path(cfg.out) / "observe" /
                           ("rate_" + rate_label(rate)) /
                           ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      const auto emit = [&](const std::string& tag, const RatioCurve& curve) {
        save_curve((dir / ("curve_" + tag + ".csv")).string(), curve);
        aucs << rate_label(rate) << ',' << seed << ',' << tag << ','
             << detail::fmt_real(curve_auc(curve)) << '\n';
      };
      for (Metric m : cfg.metrics) {
        const EdgeScoreTable table =
            score_edges(cell.graph, m, cfg.train.glohom, 0.0, seed);
        emit(metric_tag(m), perturbed_ratio_curve(table, cell.rec));
      }
      emit("random", perturbed_ratio_curve(random_ranking(cell.graph, seed),
                                           cell.rec));
      std::cout << "wrote " << dir.string() << '\n';
    }
  }
  const fs::path auc_path = fs::path(cfg.out) / "observe" / "auc.csv";
  atomic_write(auc_path, aucs.str());
  std::cout << "wrote " << auc_path.string() << '\n';
}

namespace {

struct RunCell {
  std::string tag;  // metric tag or "plain"
  Metric metric = Metric::glohom;
  bool plain = false;
  double rate = 0;
  std::uint64_t seed = 0;
};

// One grid cell: prepare data, train, persist. Failures land in result.json
// so a later pass can retry them without blocking the rest of the sweep.
void run_cell(const ExperimentConfig& cfg, const RunCell& cell,
              const fs::path& dir, std::mutex& io_mutex) {
  json result{{"metric", cell.tag},
              {"rate", cell.rate},
              {"seed", cell.seed}};
  try {
    const AttackedCell data = acquire_attacked(cfg, cell.rate, cell.seed);
    const SplitMasks masks =
        random_split(data.graph, cfg.split.train, cfg.split.val,
                     cfg.split.test, cell.seed);
    TrainConfig tc = cfg.train;
    tc.seed = cell.seed;
    const RunResult rr = cell.plain
                             ? run_plain(data.graph, tc, masks)
                             : run_perseus(data.graph, cell.metric, tc, masks);
    save_epochs((dir / "epochs.csv").string(), rr.epochs);
    save_stages((dir / "stages.jsonl").string(), rr.stages);
    save_params((dir / "params.bin").string(), rr.params);
    result["test_acc"] = rr.test_acc;
    result["val_acc"] = rr.val_acc;
    result["final_train_loss"] = rr.final_train_loss;
    result["stages"] = rr.stages.size();
    result["epochs"] = rr.total_epochs;
    {
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "cell " << cell.tag << " rate " << rate_label(cell.rate)
                << " seed " << cell.seed << ": test_acc "
                << fixed4(rr.test_acc) << " (" << rr.total_epochs
                << " epochs)\n";
    }
  } catch (const std::exception& e) {
    result["error"] = e.what();
    std::lock_guard<std::mutex> lock(io_mutex);
    std::cout << "cell " << cell.tag << " rate " << rate_label(cell.rate)
              << " seed " << cell.seed << " FAILED: " << e.what() << '\n';
  }
  atomic_write(dir / "result.json", result.dump(2) + "\n");
}

}  // namespace

void cmd_run(const ExperimentConfig& cfg) {
  std::vector<RunCell> cells;
  for (double rate : effective_rates(cfg)) {
    for (std::uint64_t seed : cfg.seeds) {
      if (cfg.curriculum) {
        for (Metric m : cfg.metrics) {
          cells.push_back({metric_tag(m), m, false, rate, seed});
        }
      }
      if (cfg.baseline || !cfg.curriculum) {
        cells.push_back({"plain", Metric::glohom, true, rate, seed});
      }
    }
  }

  std::vector<fs::path> dirs;
  std::vector<const RunCell*> todo;
  int skipped = 0;
  for (const auto& cell : cells) {
    const fs::path dir = fs::path(cfg.out) / "cells" / cell.tag /
                         ("rate_" + rate_label(cell.rate)) /
                         ("seed_" + std::to_string(cell.seed));
    fs::create_directories(dir);
    bool done = false;
    const fs::path result = dir / "result.json";
    if (fs::exists(result)) {
      try {
        json j;
        std::ifstream in(result);
        in >> j;
        done = j.contains("test_acc");  // error cells run again
      } catch (...) {
        done = false;
      }
    }
    if (done) {
      ++skipped;
    } else {
      dirs.push_back(dir);
      todo.push_back(&cell);
    }
  }
  if (skipped > 0) {
    std::cout << "resume: " << skipped << " completed cell(s) kept\n";
  }

  std::mutex io_mutex;
  std::atomic<std::size_t> next{0};
  const int workers = std::max(
      1, std::min(worker_count(), static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < todo.size();
           i = next.fetch_add(1)) {
        try {
          run_cell(cfg, *todo[i], dirs[i], io_mutex);
        } catch (const std::exception& e) {  // persistence failure
          std::lock_guard<std::mutex> lock(io_mutex);
          std::cout << "cell at " << dirs[i].string()
                    << " could not be written: " << e.what() << '\n';
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  int failed = 0;
  for (const auto& row : collect_cells(cfg.out)) {
    if (!row.ok) ++failed;
  }
  if (failed > 0) {
    std::cout << failed << " cell(s) failed; rerun to retry them\n";
  }
  write_report(cfg.out, true);
}

void cmd_report(const std::string& out_dir) { write_report(out_dir, true); }

}  // namespace perseus
