#pragma once

#include "perseus/types.hpp"

#include <string>

namespace perseus {

struct LoadStats {
  int self_loops_dropped = 0;
  int duplicates_merged = 0;
};

// Files per the documented formats: edge list `u<TAB>v` per line; features CSV
// with an `n,d_f` header then n rows of d_f reals; labels CSV `node_id,label`.
Graph load_graph(const std::string& edge_list_path,
                 const std::string& features_path,
                 const std::string& labels_path = "",
                 LoadStats* stats = nullptr);

void save_graph(const Graph& g, const std::string& edge_list_path,
                const std::string& features_path,
                const std::string& labels_path = "");

struct LccResult {
  Graph graph;
  std::vector<int> old_of_new;  // original id of each relabeled node
  std::vector<int> new_of_old;  // -1 for nodes outside the component
};

// Component size ties go to the component holding the smallest original id;
// surviving nodes are relabeled 0-based in ascending original-id order.
LccResult largest_connected_component(const Graph& g);

// Sizes are floor(ratio*n) for train/val, remainder to test. Deterministic
// per seed; masks returned in ascending node order.
SplitMasks random_split(const Graph& g, double train_ratio, double val_ratio,
                        double test_ratio, std::uint64_t seed);

Matd adjacency_matrix(const Graph& g);

WeightedAdjacency unit_weights(const Graph& g);

// A_hat = D^{-1/2} (W + I) D^{-1/2}, D = degree of (W+I). The +I self-loop
// keeps every row sum >= 1, so isolated nodes reduce to weight-1 self-loops.
template <class Derived>
Mat<typename Derived::Scalar> normalize_adjacency_dense(
    const Eigen::MatrixBase<Derived>& W) {
  using S = typename Derived::Scalar;
  Mat<S> A = W;
  A.diagonal().array() += S(1);
  Vec<S> dinv_sqrt = A.rowwise().sum().array().rsqrt();
  return dinv_sqrt.asDiagonal() * A * dinv_sqrt.asDiagonal();
}

Matd normalize_adjacency(const WeightedAdjacency& wa);

}  // namespace perseus
