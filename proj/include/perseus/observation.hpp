#pragma once

#include "perseus/attacks.hpp"
#include "perseus/metrics.hpp"
#include "perseus/types.hpp"

namespace perseus {

// Composition of ranking prefixes: for each inspection ratio r on a fixed
// grid, the top k = round(r*m) edges are split into the fraction that came
// from the perturbation (r_p) and the fraction that is original (r_o).
// Grid points whose k rounds to zero are omitted.
struct RatioCurve {
  std::vector<double> grid;  // inspection ratio r
  std::vector<int> k;        // prefix length round(r*m)
  std::vector<double> r_p;   // perturbed fraction of the prefix
  std::vector<double> r_o;   // 1 - r_p
};

RatioCurve perturbed_ratio_curve(const std::vector<Edge>& ranking,
                                 const PerturbationRecord& rec,
                                 double step = 0.05);

RatioCurve perturbed_ratio_curve(const EdgeScoreTable& table,
                                 const PerturbationRecord& rec,
                                 double step = 0.05);

// Trapezoid area under r_p, normalized by the grid span. Low values mean
// perturbed edges are pushed to the hard end of the ranking.
double curve_auc(const RatioCurve& curve);

}  // namespace perseus
