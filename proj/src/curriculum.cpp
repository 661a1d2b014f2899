#include "perseus/curriculum.hpp"

#include <cmath>

namespace perseus {

CurriculumState warm_start(int m, double r0) {
  if (m < 0) throw validation_error("warm_start: negative edge count");
  if (r0 <= 0.0 || r0 > 1.0) {
    throw validation_error("warm-start ratio must lie in (0,1]");
  }
  CurriculumState st;
  st.m = m;
  st.r = r0;
  st.ratio_sum = r0;
  return st;
}

double next_ratio(const CurriculumState& state, double lambda) {
  if (lambda <= 0.0 || lambda > 1.0) {
    throw validation_error("decay lambda must lie in (0,1]");
  }
  return std::min(std::max(lambda * state.r, 0.05), state.r);
}

void advance_stage(CurriculumState& state, double lambda) {
  state.r = next_ratio(state, lambda);
  state.ratio_sum += state.r;
  ++state.s;
}

void select_edges(CurriculumState& state, const std::vector<Edge>& ranking) {
  if (static_cast<int>(ranking.size()) != state.m) {
    throw validation_error("select_edges: ranking length does not match m");
  }
  const int target = static_cast<int>(
      std::min<long long>(state.m, std::llround(state.ratio_sum * state.m)));
  for (int i = state.k; i < target; ++i) {
    state.admitted.emplace(ranking[i], state.s);
  }
  state.k = std::max(state.k, target);
}

WeightedAdjacency edge_weights(const CurriculumState& state, int n) {
  const int events = state.s + 1;
  WeightedAdjacency wa;
  wa.n = n;
  for (const auto& [e, stage] : state.admitted) {
    wa.w[e] = static_cast<double>(events - stage) / events;
  }
  return wa;
}

bool should_advance(AdvanceMonitor& monitor, double new_val_loss) {
  if (monitor.patience < 1) throw validation_error("patience must be >= 1");
  if (new_val_loss < monitor.best_val - monitor.min_delta) {
    monitor.best_val = new_val_loss;
    monitor.epochs_since_best = 0;
  } else {
    ++monitor.epochs_since_best;
  }
  return monitor.epochs_since_best >= monitor.patience;
}

}  // namespace perseus
