#include "perseus/model.hpp"

#include "perseus/graph.hpp"
#include "perseus/rng.hpp"

namespace perseus {

namespace {
constexpr std::uint64_t kInitStream = 0x11a7;
constexpr std::uint64_t kDropoutStream = 0x0d70;

Matd dropout_keep_mask(int rows, int cols, double rate, std::uint64_t seed,
                       int global_epoch) {
  Rng rng(derive_seed(seed, kDropoutStream,
                      static_cast<std::uint64_t>(global_epoch)));
  Matd keep(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      keep(i, j) = rng.unit() >= rate ? 1.0 : 0.0;
    }
  }
  return keep;
}

// Clean (dropout-free) metrics of the current parameters.
struct EvalPoint {
  double train_loss, val_loss, val_acc;
};
EvalPoint eval_point(const ModelParams& p, const Matd& X, const Matd& Ahat,
                     const std::vector<int>& y, const SplitMasks& masks,
                     double weight_decay) {
  const auto fc = forward(p, X, Ahat);
  return {loss(fc.logits, y, masks.train, p, weight_decay),
          softmax_cross_entropy(fc.logits, y, masks.val),
          evaluate(fc.logits, y, masks.val)};
}
}  // namespace

ModelParams init_params(int d_f, int h, int C, std::uint64_t seed) {
  if (d_f < 1 || h < 1 || C < 1) {
    throw validation_error("init_params: dimensions must be positive");
  }
  Rng rng(derive_seed(seed, kInitStream));
  ModelParams p;
  p.W1.resize(d_f, h);
  const double s1 = std::sqrt(2.0 / d_f);
  for (int i = 0; i < d_f; ++i) {
    for (int j = 0; j < h; ++j) p.W1(i, j) = s1 * rng.gauss();
  }
  p.W2.resize(h, C);
  const double s2 = std::sqrt(2.0 / h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < C; ++j) p.W2(i, j) = s2 * rng.gauss();
  }
  return p;
}

ForwardCache forward(const ModelParams& p, const Matd& X, const Matd& Ahat) {
  return gcn_forward(p.W1, p.W2, X, Ahat);
}

double loss(const Matd& logits, const std::vector<int>& y,
            const std::vector<int>& mask, const ModelParams& p,
            double weight_decay) {
  return softmax_cross_entropy(logits, y, mask) +
         weight_decay * p.W1.squaredNorm();
}

Grads gradients(const ModelParams& p, const Matd& X, const Matd& Ahat,
                const std::vector<int>& y, const std::vector<int>& mask,
                double weight_decay, const Matd* keep, double dropout_rate) {
  auto [d1, d2] = gcn_gradients(p.W1, p.W2, X, Ahat, y, mask, weight_decay,
                                keep, dropout_rate);
  return {std::move(d1), std::move(d2)};
}

double evaluate(const Matd& logits, const std::vector<int>& y,
                const std::vector<int>& mask) {
  if (mask.empty()) throw validation_error("evaluate: empty node mask");
  int hits = 0;
  for (int i : mask) {
    int arg = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, arg)) arg = c;  // ties keep smallest index
    }
    hits += arg == y[i];
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

StageResult train_stage(const ModelParams& start, const Matd& X,
                        const Matd& Ahat, const std::vector<int>& y,
                        const SplitMasks& masks, const TrainConfig& cfg,
                        AdvanceMonitor& monitor, int stage_index,
                        int* global_epoch, std::vector<EpochRow>* epoch_log) {
  if (cfg.learning_rate <= 0.0) {
    throw validation_error("learning rate must be positive");
  }
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0) {
    throw validation_error("dropout rate must lie in [0,1)");
  }
  StageResult res;
  res.best = start;
  if (cfg.max_epochs_per_stage <= 0) {
    const auto ev = eval_point(start, X, Ahat, y, masks, cfg.weight_decay);
    res.best_val_loss = res.last_val_loss = ev.val_loss;
    res.best_val_acc = ev.val_acc;
    res.last_train_loss = ev.train_loss;
    return res;
  }

  ModelParams params = start;
  const int h = static_cast<int>(params.W1.cols());
  for (int ep = 0; ep < cfg.max_epochs_per_stage; ++ep) {
    const Matd keep = dropout_keep_mask(static_cast<int>(X.rows()), h,
                                        cfg.dropout_rate, cfg.seed,
                                        *global_epoch);
    const Grads gr = gradients(params, X, Ahat, y, masks.train,
                               cfg.weight_decay, &keep, cfg.dropout_rate);
    params.W1 -= cfg.learning_rate * gr.dW1;
    params.W2 -= cfg.learning_rate * gr.dW2;

    const auto ev = eval_point(params, X, Ahat, y, masks, cfg.weight_decay);
    if (!std::isfinite(ev.train_loss) || !std::isfinite(ev.val_loss)) {
      throw training_error("training diverged (non-finite loss) at epoch " +
                               std::to_string(ep),
                           ep);
    }
    if (epoch_log) {
      epoch_log->push_back(
          {stage_index, ep, ev.train_loss, ev.val_loss, ev.val_acc});
    }
    ++*global_epoch;
    ++res.epochs;

    const bool advance = should_advance(monitor, ev.val_loss);
    if (monitor.epochs_since_best == 0) {  // this epoch improved
      res.best = params;
      res.best_val_loss = ev.val_loss;
      res.best_val_acc = ev.val_acc;
    }
    res.last_train_loss = ev.train_loss;
    res.last_val_loss = ev.val_loss;
    if (advance) {
      res.advanced = true;
      break;
    }
  }
  return res;
}

namespace {

RunResult run_with_ranking(const Graph& g, const std::vector<Edge>* ranking,
                           const TrainConfig& cfg, const SplitMasks& masks) {
  g.validate();
  if (!g.has_labels()) {
    throw validation_error("training requires node labels");
  }
  if (masks.train.empty() || masks.val.empty() || masks.test.empty()) {
    throw validation_error("training requires nonempty train/val/test masks");
  }

  RunResult out;
  ModelParams params =
      init_params(g.feature_dim(), cfg.hidden, g.C, cfg.seed);
  int global_epoch = 0;
  const int m = g.m();
  Matd Ahat;
  StageResult sr;

  if (ranking) {
    CurriculumState st = warm_start(m, cfg.warm_ratio);
    select_edges(st, *ranking);
    int prev_k = 0;
    while (true) {
      const int new_edges = st.k - prev_k;
      Ahat = normalize_adjacency(edge_weights(st, g.n));
      AdvanceMonitor monitor{cfg.patience, cfg.min_delta};
      sr = train_stage(params, g.X, Ahat, g.y, masks, cfg, monitor, st.s,
                       &global_epoch, &out.epochs);
      params = sr.best;
      out.stages.push_back({st.s, st.r, st.k, new_edges, sr.last_val_loss});
      if (st.k >= m) break;
      prev_k = st.k;
      advance_stage(st, cfg.decay);
      select_edges(st, *ranking);
    }
  } else {
    // no-curriculum baseline: full graph, full budget, inert monitor
    Ahat = normalize_adjacency(unit_weights(g));
    AdvanceMonitor inert{cfg.max_epochs_per_stage + 1, cfg.min_delta};
    sr = train_stage(params, g.X, Ahat, g.y, masks, cfg, inert, 0,
                     &global_epoch, &out.epochs);
    params = sr.best;
    out.stages.push_back({0, 1.0, m, m, sr.last_val_loss});
  }

  out.params = params;
  const auto fc = forward(params, g.X, Ahat);
  out.test_acc = evaluate(fc.logits, g.y, masks.test);
  out.val_acc = sr.best_val_acc;
  out.final_train_loss = sr.last_train_loss;
  out.total_epochs = global_epoch;
  return out;
}

}  // namespace

RunResult run_perseus(const Graph& g, Metric metric, const TrainConfig& cfg,
                      const SplitMasks& masks) {
  const EdgeScoreTable table =
      score_edges(g, metric, cfg.glohom, 0.0, cfg.seed);
  return run_with_ranking(g, &table.ranking, cfg, masks);
}

RunResult run_perseus(const Graph& g, Metric metric, const TrainConfig& cfg) {
  return run_perseus(g, metric, cfg,
                     random_split(g, 0.1, 0.1, 0.8, cfg.seed));
}

RunResult run_plain(const Graph& g, const TrainConfig& cfg,
                    const SplitMasks& masks) {
  return run_with_ranking(g, nullptr, cfg, masks);
}

RunResult run_plain(const Graph& g, const TrainConfig& cfg) {
  return run_plain(g, cfg, random_split(g, 0.1, 0.1, 0.8, cfg.seed));
}

}  // namespace perseus
