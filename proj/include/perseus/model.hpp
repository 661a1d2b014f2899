#pragma once

#include "perseus/curriculum.hpp"
#include "perseus/metrics.hpp"
#include "perseus/types.hpp"

#include <cmath>
#include <utility>

namespace perseus {

struct ModelParams {
  Matd W1;  // d_f x h
  Matd W2;  // h x C
};

struct TrainConfig {
  double learning_rate = 0.01;
  int max_epochs_per_stage = 1000;
  double dropout_rate = 0.5;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  int hidden = 64;
  int patience = 10;
  double min_delta = 0.01;
  double warm_ratio = 0.2;  // r0
  double decay = 0.5;       // lambda
  GloHomConfig glohom;
};

ModelParams init_params(int d_f, int h, int C, std::uint64_t seed);

template <class S>
struct GcnCache {
  Mat<S> Z1;      // pre-activation A(XW1)
  Mat<S> H;       // relu(Z1), dropout applied in training mode
  Mat<S> logits;  // A(H W2)
};

namespace detail {
template <class S>
void check_gcn_shapes(const Mat<S>& W1, const Mat<S>& W2, const Mat<S>& X,
                      const Mat<S>& Ahat) {
  if (Ahat.rows() != Ahat.cols() || Ahat.rows() != X.rows() ||
      X.cols() != W1.rows() || W1.cols() != W2.rows()) {
    throw dimension_error("gcn: inconsistent shapes");
  }
}
}  // namespace detail

// Two-layer graph convolution. `keep` is a 0/1 mask on the hidden layer
// (nullptr = eval mode); inverted scaling 1/(1-p) keeps activations unbiased.
template <class S>
GcnCache<S> gcn_forward(const Mat<S>& W1, const Mat<S>& W2, const Mat<S>& X,
                        const Mat<S>& Ahat, const Mat<S>* keep = nullptr,
                        S dropout_rate = 0) {
  detail::check_gcn_shapes(W1, W2, X, Ahat);
  GcnCache<S> c;
  c.Z1 = Ahat * (X * W1);
  c.H = c.Z1.cwiseMax(S(0));
  if (keep) c.H = c.H.cwiseProduct(*keep) / (S(1) - dropout_rate);
  c.logits = Ahat * (c.H * W2);
  return c;
}

template <class S>
S softmax_cross_entropy(const Mat<S>& logits, const std::vector<int>& y,
                        const std::vector<int>& mask) {
  if (mask.empty()) throw validation_error("loss: empty node mask");
  S total = 0;
  for (int i : mask) {
    const auto z = logits.row(i);
    const S mx = z.maxCoeff();
    const S lse = mx + std::log((z.array() - mx).exp().sum());
    total += lse - z[y[i]];
  }
  return total / S(mask.size());
}

// Hand-derived gradients of softmax CE + weight_decay*||W1||^2 (first layer
// only). Dropout mask must match the forward pass being differentiated.
template <class S>
std::pair<Mat<S>, Mat<S>> gcn_gradients(const Mat<S>& W1, const Mat<S>& W2,
                                        const Mat<S>& X, const Mat<S>& Ahat,
                                        const std::vector<int>& y,
                                        const std::vector<int>& mask,
                                        S weight_decay,
                                        const Mat<S>* keep = nullptr,
                                        S dropout_rate = 0) {
  if (mask.empty()) throw validation_error("gradients: empty node mask");
  const auto c = gcn_forward(W1, W2, X, Ahat, keep, dropout_rate);
  Mat<S> G = Mat<S>::Zero(c.logits.rows(), c.logits.cols());
  for (int i : mask) {
    const auto z = c.logits.row(i);
    const S mx = z.maxCoeff();
    Eigen::Array<S, 1, Eigen::Dynamic> p = (z.array() - mx).exp();
    G.row(i) = (p / p.sum()).matrix();
    G(i, y[i]) -= S(1);
  }
  G /= S(mask.size());
  const Mat<S> AG = Ahat * G;  // Ahat is symmetric
  Mat<S> dW2 = c.H.transpose() * AG;
  Mat<S> dH = AG * W2.transpose();
  if (keep) dH = dH.cwiseProduct(*keep) / (S(1) - dropout_rate);
  const Mat<S> dZ1 =
      dH.cwiseProduct((c.Z1.array() > S(0)).template cast<S>().matrix());
  Mat<S> dW1 = X.transpose() * (Ahat * dZ1) + S(2) * weight_decay * W1;
  return {std::move(dW1), std::move(dW2)};
}

// --- double-precision model API ----------------------------------------

using ForwardCache = GcnCache<double>;

// Eval-mode forward (no dropout).
ForwardCache forward(const ModelParams& p, const Matd& X, const Matd& Ahat);

// Mean softmax cross-entropy over the mask + weight_decay*||W1||^2.
double loss(const Matd& logits, const std::vector<int>& y,
            const std::vector<int>& mask, const ModelParams& p,
            double weight_decay);

struct Grads {
  Matd dW1, dW2;
};
Grads gradients(const ModelParams& p, const Matd& X, const Matd& Ahat,
                const std::vector<int>& y, const std::vector<int>& mask,
                double weight_decay, const Matd* keep = nullptr,
                double dropout_rate = 0.0);

// Accuracy with argmax ties resolved to the smallest class index.
double evaluate(const Matd& logits, const std::vector<int>& y,
                const std::vector<int>& mask);

struct EpochRow {
  int stage = 0;
  int epoch = 0;
  double train_loss = 0, val_loss = 0, val_acc = 0;
};

struct StageLog {
  int stage = 0;
  double r = 0;
  int k = 0;
  int new_edges = 0;
  double val_loss_at_advance = 0;
};

struct StageResult {
  ModelParams best;          // parameters from the best-validation epoch
  double best_val_loss = 0;
  double best_val_acc = 0;
  double last_train_loss = 0;
  double last_val_loss = 0;
  bool advanced = false;  // monitor fired (vs epoch cap)
  int epochs = 0;
};

// Full-batch fixed-rate gradient descent for one stage. Dropout masks derive
// from (cfg.seed, global epoch index). Losses are logged from a clean
// post-update forward; val_loss excludes the regularizer.
StageResult train_stage(const ModelParams& start, const Matd& X,
                        const Matd& Ahat, const std::vector<int>& y,
                        const SplitMasks& masks, const TrainConfig& cfg,
                        AdvanceMonitor& monitor, int stage_index,
                        int* global_epoch, std::vector<EpochRow>* epoch_log);

struct RunResult {
  ModelParams params;            // best-val parameters of the final stage
  std::vector<StageLog> stages;
  std::vector<EpochRow> epochs;
  double test_acc = 0;           // on the final stage's operator
  double val_acc = 0;            // at the final stage's best-val epoch
  double final_train_loss = 0;   // last train loss of the final stage
  int total_epochs = 0;
};

// Algorithm: rank edges once, admit the warm-start prefix, then alternate
// train-to-plateau and edge admission until the full edge set is in.
RunResult run_perseus(const Graph& g, Metric metric, const TrainConfig& cfg,
                      const SplitMasks& masks);
RunResult run_perseus(const Graph& g, Metric metric, const TrainConfig& cfg);

// No-curriculum baseline: all edges at weight 1 from epoch 0, trained for the
// full epoch budget (no advance monitor), best-val parameter selection.
RunResult run_plain(const Graph& g, const TrainConfig& cfg,
                    const SplitMasks& masks);
RunResult run_plain(const Graph& g, const TrainConfig& cfg);

}  // namespace perseus
