#include "perseus/metrics.hpp"

#include "perseus/graph.hpp"
#include "perseus/rng.hpp"

#include <Eigen/LU>

#include <cmath>

namespace perseus {

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::centrality: return "pagerank-centrality";
    case Metric::jaccard: return "jaccard";
    case Metric::glohom: return "glohom";
    case Metric::random_baseline: return "random";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  if (s == "cen" || s == "pagerank-centrality" || s == "centrality") {
    return Metric::centrality;
  }
  if (s == "jac" || s == "jaccard") return Metric::jaccard;
  if (s == "glo" || s == "glohom") return Metric::glohom;
  if (s == "random") return Metric::random_baseline;
  throw usage_error("unknown metric '" + s + "' (expected cen, jac or glo)");
}

PageRankResult pagerank(const Graph& g, double damping, double tol,
                        int max_iter) {
  if (damping < 0.0 || damping >= 1.0) {
    throw validation_error("pagerank damping must lie in [0,1)");
  }
  const auto nb = g.neighbors();
  const auto deg = g.degrees();
  PageRankResult res;
  res.pr = Vecd::Ones(g.n);
  Vecd next(g.n);
  res.converged = false;
  for (int it = 0; it < max_iter; ++it) {
    for (int u = 0; u < g.n; ++u) {
      double acc = 0.0;
      for (int v : nb[u]) acc += res.pr[v] / deg[v];
      next[u] = (1.0 - damping) + damping * acc;
    }
    const double diff = (next - res.pr).cwiseAbs().maxCoeff();
    res.pr = next;
    if (diff < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

EdgeScoreTable edge_centrality(const Vecd& pr, const Graph& g) {
  if (pr.size() != g.n) {
    throw dimension_error("edge_centrality: PageRank vector size mismatch");
  }
  std::map<Edge, double> raw;
  for (const auto& e : g.edges) raw[e] = pr[e.first] + pr[e.second];
  return rank_edges(Metric::centrality, raw);
}

Matd jaccard_matrix(const Graph& g, double binarize_threshold) {
  if (g.feature_dim() == 0) {
    throw validation_error("jaccard: graph has no features");
  }
  return jaccard_matrix_from(g.X, binarize_threshold);
}

double spectral_radius(const Matd& A, int iters) {
  if (A.rows() == 0) return 0.0;
  Vecd v(A.rows());
  for (int i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 0.01 * static_cast<double>((i * 2654435761ULL) % 97) / 97.0;
  }
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vecd w = A * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lam = norm;
    v = w / norm;
  }
  return lam;
}

Matd glohom_operator(const Graph& g, double alpha) {
  Matd A = adjacency_matrix(g);
  if (alpha * spectral_radius(A) < 1.0) return A;
  Vecd d = A.rowwise().sum();
  Vecd dis(g.n);
  for (int i = 0; i < g.n; ++i) dis[i] = d[i] > 0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  return dis.asDiagonal() * A * dis.asDiagonal();
}

Matd glohom_propagator(const Matd& op, const GloHomConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.alpha >= 1.0) {
    throw validation_error("glohom alpha must lie in [0,1)");
  }
  const auto n = op.rows();
  const Matd I = Matd::Identity(n, n);
  if (cfg.mode == GloHomConfig::Mode::series) {
    if (cfg.K < 0) throw validation_error("glohom series order K must be >= 0");
    if (cfg.alpha > 0.0 && cfg.alpha * spectral_radius(op) >= 1.0) {
      throw validation_error(
          "glohom series diverges: alpha * spectral_radius >= 1");
    }
    // Horner: M_K = I + aA(I + aA(... (I + aA) ...))
    Matd M = I;
    for (int k = 0; k < cfg.K; ++k) M = I + cfg.alpha * (op * M);
    return M;
  }
  Eigen::PartialPivLU<Matd> lu(I - cfg.alpha * op);
  Matd M = lu.solve(I);
  const double resid = ((I - cfg.alpha * op) * M - I).cwiseAbs().maxCoeff();
  if (!std::isfinite(resid) || resid > 1e-6) {
    throw singularity_error(
        "(I - alpha*A) is numerically singular; use series mode");
  }
  return M;
}

EdgeScoreTable glohom_scores(const Graph& g, const Matd& J,
                             const GloHomConfig& cfg) {
  if (J.rows() != g.n || J.cols() != g.n) {
    throw dimension_error("glohom: similarity matrix must be n x n");
  }
  const Matd op = glohom_operator(g, cfg.alpha);
  const Matd M = glohom_propagator(op, cfg);
  const Matd G = M * J * M;
  std::map<Edge, double> raw;
  for (const auto& e : g.edges) raw[e] = G(e.first, e.second);
  return rank_edges(Metric::glohom, raw);
}

DeltaHom delta_hom_exact(const Graph& g, Edge e, const Matd& J, double alpha) {
  if (!g.has_edge(e.first, e.second)) {
    throw validation_error("delta_hom_exact: edge not in graph");
  }
  const int n = g.n;
  const int k = e.first, l = e.second;
  const Matd I = Matd::Identity(n, n);
  const Matd A = adjacency_matrix(g);

  auto inverse_of = [&](const Matd& B) {
    Eigen::PartialPivLU<Matd> lu(B);
    Matd M = lu.solve(I);
    const double resid = (B * M - I).cwiseAbs().maxCoeff();
    if (!std::isfinite(resid) || resid > 1e-6) {
      throw singularity_error("delta_hom_exact: (I - alpha*A) is singular");
    }
    return M;
  };
  const Matd M = inverse_of(I - alpha * A);

  // direct branch: re-solve on the edge-removed adjacency
  Matd Ap = A;
  Ap(k, l) = Ap(l, k) = 0.0;
  const Matd Mp_direct = inverse_of(I - alpha * Ap);
  DeltaHom out;
  out.direct = (Mp_direct - M).cwiseProduct(J).sum();

  // closed branch: M' via the rank-2 Woodbury update of M, then the
  // symmetrized entry identity
  Eigen::Matrix2d cap;
  cap << 1.0 + alpha * M(l, k), alpha * M(l, l),
         alpha * M(k, k), 1.0 + alpha * M(k, l);
  Matd Mp;
  if (std::abs(cap.determinant()) < 1e-12) {
    Mp = Mp_direct;  // degenerate capacitance: fall back to the fresh solve
  } else {
    Matd MU(n, 2);
    MU.col(0) = alpha * M.col(k);
    MU.col(1) = alpha * M.col(l);
    Matd VM(2, n);
    VM.row(0) = M.row(l);
    VM.row(1) = M.row(k);
    Mp = M - MU * cap.inverse() * VM;
  }
  const Matd JM = J * M;
  const double g_kl = Mp.row(k).dot(JM.col(l));
  const double g_lk = Mp.row(l).dot(JM.col(k));
  out.closed = -alpha * (g_kl + g_lk);
  return out;
}

EdgeScoreTable rank_edges(Metric metric, const std::map<Edge, double>& raw) {
  if (raw.empty()) throw validation_error("rank_edges: empty score map");
  double lo = raw.begin()->second, hi = lo;
  for (const auto& [e, s] : raw) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  EdgeScoreTable t;
  t.metric = metric;
  t.raw = raw;
  const double span = hi - lo;
  for (const auto& [e, s] : raw) {
    t.scores[e] = span > 0.0 ? (s - lo) / span : 0.0;
  }
  t.ranking.reserve(raw.size());
  for (const auto& [e, s] : raw) t.ranking.push_back(e);
  std::sort(t.ranking.begin(), t.ranking.end(), [&](const Edge& a, const Edge& b) {
    const double sa = t.scores.at(a), sb = t.scores.at(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return t;
}

std::vector<Edge> random_ranking(const Graph& g, std::uint64_t seed) {
  std::vector<Edge> r = g.edges;
  Rng rng(derive_seed(seed, /*stream=*/0x7a4d));
  rng.shuffle(r);
  return r;
}

EdgeScoreTable score_edges(const Graph& g, Metric metric,
                           const GloHomConfig& cfg, double binarize_threshold,
                           std::uint64_t seed) {
  switch (metric) {
    case Metric::centrality:
      return edge_centrality(pagerank(g).pr, g);
    case Metric::jaccard: {
      const Matd J = jaccard_matrix(g, binarize_threshold);
      std::map<Edge, double> raw;
      for (const auto& e : g.edges) raw[e] = J(e.first, e.second);
      return rank_edges(Metric::jaccard, raw);
    }
    case Metric::glohom:
      return glohom_scores(g, jaccard_matrix(g, binarize_threshold), cfg);
    case Metric::random_baseline: {
      EdgeScoreTable t;
      t.metric = Metric::random_baseline;
      t.ranking = random_ranking(g, seed);
      const auto m = static_cast<double>(t.ranking.size());
      for (std::size_t i = 0; i < t.ranking.size(); ++i) {
        // pseudo-scores decreasing along the shuffled order
        const double s = m > 1 ? 1.0 - static_cast<double>(i) / (m - 1) : 0.0;
        t.raw[t.ranking[i]] = s;
        t.scores[t.ranking[i]] = s;
      }
      return t;
    }
  }
  throw validation_error("score_edges: unknown metric");
}

}  // namespace perseus
