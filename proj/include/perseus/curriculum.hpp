#pragma once

#include "perseus/types.hpp"

#include <limits>
#include <map>

namespace perseus {

// Adaptive edge selection: stage counter, ratio decay, cumulative admission.
struct CurriculumState {
  int s = 0;        // 0-based stage index; selection events so far = s + 1
  double r = 0.0;   // current addition ratio
  int k = 0;        // cumulative admitted edge count
  std::map<Edge, int> admitted;  // edge -> stage of admission (0-based)
  int m = 0;        // total edge count of the input graph
  double ratio_sum = 0.0;  // sum of ratios over all stages so far
};

// Stage 0 state with ratio r0 in (0,1]; call select_edges to admit the prefix.
CurriculumState warm_start(int m, double r0);

// max(lambda * r, 0.05), clamped to never exceed the previous ratio (a ratio
// already below the floor stays put).
double next_ratio(const CurriculumState& state, double lambda);

// Advance to the next stage: s+1, decayed ratio, updated ratio sum.
void advance_stage(CurriculumState& state, double lambda);

// Admit up to the cumulative target min(m, round(m * sum of ratios)) from the
// fixed easy->hard ranking; earlier admissions are never evicted.
void select_edges(CurriculumState& state, const std::vector<Edge>& ranking);

// Weight (S - stage(e)) / S with S = selection events so far: the running
// average of the stage adjacencies. Oldest edges weigh 1.
WeightedAdjacency edge_weights(const CurriculumState& state, int n);

// Plateau detector that triggers stage advancement.
struct AdvanceMonitor {
  int patience = 10;
  double min_delta = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;
};

// True (advance) iff epochs_since_best reaches patience after processing the
// new value; an improvement is a decrease of more than min_delta.
bool should_advance(AdvanceMonitor& monitor, double new_val_loss);

}  // namespace perseus
