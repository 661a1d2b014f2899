#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace perseus {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
using Matd = Mat<double>;
using Vecd = Vec<double>;

// Undirected edge, stored once with first < second.
using Edge = std::pair<int, int>;

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

// Error taxonomy. The CLI maps usage_error -> exit 2, all others -> exit 1.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct dimension_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct singularity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct training_error : std::runtime_error {
  int epoch;
  training_error(const std::string& msg, int ep)
      : std::runtime_error(msg), epoch(ep) {}
};
// Attack candidate pool smaller than the requested budget.
struct pool_exhausted_error : std::runtime_error {
  int achievable;
  pool_exhausted_error(const std::string& msg, int count)
      : std::runtime_error(msg), achievable(count) {}
};

// Undirected simple graph with dense node features and optional labels.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;  // sorted, unique, no self-loops, endpoints in [0,n)
  Matd X;                   // n x d_f
  std::vector<int> y;       // empty when unlabeled, else size n, values in [0,C)
  int C = 0;

  int m() const { return static_cast<int>(edges.size()); }
  int feature_dim() const { return static_cast<int>(X.cols()); }
  bool has_labels() const { return !y.empty(); }

  bool has_edge(int u, int v) const {
    return std::binary_search(edges.begin(), edges.end(), make_edge(u, v));
  }

  std::vector<int> degrees() const {
    std::vector<int> d(n, 0);
    for (const auto& [u, v] : edges) {
      ++d[u];
      ++d[v];
    }
    return d;
  }

  std::vector<std::vector<int>> neighbors() const {
    std::vector<std::vector<int>> nb(n);
    for (const auto& [u, v] : edges) {
      nb[u].push_back(v);
      nb[v].push_back(u);
    }
    return nb;
  }

  // Sort + dedup the edge list; call after bulk edge insertion.
  void finalize_edges() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  void validate() const;  // throws validation/dimension errors on breach
};

struct SplitMasks {
  std::vector<int> train, val, test;
};

// Per-edge propagation weights in (0,1]; support is a subset of some Graph's
// edge set. std::map keeps iteration deterministic.
struct WeightedAdjacency {
  int n = 0;
  std::map<Edge, double> w;
};

}  // namespace perseus
