#include "perseus/observation.hpp"

#include <algorithm>
#include <cmath>

namespace perseus {

RatioCurve perturbed_ratio_curve(const std::vector<Edge>& ranking,
                                 const PerturbationRecord& rec,
                                 double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw validation_error("ratio curve: step must lie in (0,1]");
  }
  std::vector<Edge> added = rec.added;
  std::sort(added.begin(), added.end());
  for (const auto& e : added) {
    if (std::find(ranking.begin(), ranking.end(), e) == ranking.end()) {
      throw validation_error("ratio curve: perturbation edge (" +
                             std::to_string(e.first) + "," +
                             std::to_string(e.second) +
                             ") is missing from the ranking");
    }
  }

  const int m = static_cast<int>(ranking.size());
  std::vector<int> prefix_added(m + 1, 0);
  for (int i = 0; i < m; ++i) {
    const bool hit = std::binary_search(added.begin(), added.end(), ranking[i]);
    prefix_added[i + 1] = prefix_added[i] + (hit ? 1 : 0);
  }

  RatioCurve curve;
  for (int i = 1;; ++i) {
    const double r = std::round(i * step * 1e12) / 1e12;  // snap 3*0.05 to 0.15
    if (r > 1.0 + 1e-9) break;
    const double rc = std::min(r, 1.0);
    const int k = std::min<int>(m, static_cast<int>(std::llround(rc * m)));
    if (k == 0) continue;
    const double rp = static_cast<double>(prefix_added[k]) / k;
    curve.grid.push_back(rc);
    curve.k.push_back(k);
    curve.r_p.push_back(rp);
    curve.r_o.push_back(1.0 - rp);
    if (rc >= 1.0) break;
  }
  return curve;
}

RatioCurve perturbed_ratio_curve(const EdgeScoreTable& table,
                                 const PerturbationRecord& rec, double step) {
  return perturbed_ratio_curve(table.ranking, rec, step);
}

double curve_auc(const RatioCurve& curve) {
  const std::size_t n = curve.grid.size();
  if (n < 2) {
    throw validation_error("curve_auc: need at least two grid points");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    area += 0.5 * (curve.r_p[i] + curve.r_p[i - 1]) *
            (curve.grid[i] - curve.grid[i - 1]);
  }
  return area / (curve.grid.back() - curve.grid.front());
}

}  // namespace perseus
