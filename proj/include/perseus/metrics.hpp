#pragma once

#include "perseus/types.hpp"

#include <map>
#include <string>

namespace perseus {

enum class Metric { centrality, jaccard, glohom, random_baseline };

std::string metric_name(Metric m);
// Accepts short ({cen,jac,glo}) and long names.
Metric metric_from_string(const std::string& s);

struct EdgeScoreTable {
  Metric metric = Metric::glohom;
  std::map<Edge, double> raw;     // the metric's native values
  std::map<Edge, double> scores;  // min-max normalized to [0,1]
  std::vector<Edge> ranking;      // easy -> hard: score desc, ties by endpoints
};

struct PageRankResult {
  Vecd pr;
  bool converged = true;
};

// Unnormalized fixed point PR(u) = (1-d) + d * sum_{v in N(u)} PR(v)/deg(v).
// Zero-degree nodes sit at 1-d. Non-convergence flags the result, not an error.
PageRankResult pagerank(const Graph& g, double damping = 0.85,
                        double tol = 1e-10, int max_iter = 10000);

// score(u,v) = PR(u) + PR(v); high centrality ranks easy.
EdgeScoreTable edge_centrality(const Vecd& pr, const Graph& g);

// Pairwise Jaccard over rows of X binarized as x > threshold; 0 when both
// supports are empty.
template <class Derived>
Mat<typename Derived::Scalar> jaccard_matrix_from(
    const Eigen::MatrixBase<Derived>& X,
    typename Derived::Scalar threshold = 0) {
  using S = typename Derived::Scalar;
  if (X.cols() == 0) throw validation_error("jaccard: zero feature dimension");
  const auto n = X.rows();
  Mat<S> B = (X.array() > threshold).template cast<S>();
  Mat<S> inter = B * B.transpose();
  Vec<S> s = B.rowwise().sum();
  Mat<S> uni = s.replicate(1, n) + s.transpose().replicate(n, 1) - inter;
  // counts are integers, so max(.,1) only rescues the 0/0 -> 0 case
  return (inter.array() / uni.array().max(S(1))).matrix();
}

Matd jaccard_matrix(const Graph& g, double binarize_threshold = 0.0);

struct GloHomConfig {
  enum class Mode { exact, series };
  double alpha = 0.5;
  Mode mode = Mode::exact;
  int K = 4;  // series order
};

// Dominant |eigenvalue| by power iteration (A symmetric).
double spectral_radius(const Matd& A, int iters = 200);

// The scoring operator: raw adjacency when alpha*rho(A) < 1, else the
// degree-normalized adjacency D^{-1/2} A D^{-1/2} so the walk series converges.
Matd glohom_operator(const Graph& g, double alpha);

// M = (I - alpha*op)^{-1} (exact) or the K-term Neumann partial sum (series).
Matd glohom_propagator(const Matd& op, const GloHomConfig& cfg);

// Per-edge scores [M J M]_uv; large = easy.
EdgeScoreTable glohom_scores(const Graph& g, const Matd& J,
                             const GloHomConfig& cfg);

struct DeltaHom {
  double direct;  // Hom(A') - Hom(A), both sides re-solved
  double closed;  // -alpha*([M'JM]_kl + [M'JM]_lk), M' by rank-2 update
};

// Effect on Hom = <M,J> of removing one edge; the two branches agree to
// rounding. Always evaluated on the raw adjacency.
DeltaHom delta_hom_exact(const Graph& g, Edge e, const Matd& J, double alpha);

// Min-max normalize and order: score desc, ties (min endpoint, max endpoint)
// ascending. All-equal scores normalize to 0 and fall back to pure tie order.
EdgeScoreTable rank_edges(Metric metric, const std::map<Edge, double>& raw);

std::vector<Edge> random_ranking(const Graph& g, std::uint64_t seed);

// Dispatcher used by the CLI and runners.
EdgeScoreTable score_edges(const Graph& g, Metric metric,
                           const GloHomConfig& cfg,
                           double binarize_threshold = 0.0,
                           std::uint64_t seed = 0);

}  // namespace perseus
