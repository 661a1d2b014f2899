#pragma once

#include "perseus/types.hpp"

namespace perseus {

struct PerturbationRecord {
  double rate = 0.0;
  std::vector<Edge> added;    // sorted; absent from the clean graph
  std::vector<Edge> removed;  // sorted; present in the clean graph
};

// Stochastic block model with block-indicator binary features (feature
// dimensions partitioned across blocks) corrupted by per-bit flips; labels
// are block ids. Deterministic per seed.
Graph sbm_generate(int n, int blocks, double p_in, double p_out,
                   int feature_dim, double flip_prob, std::uint64_t seed);

// round(rate*m) uniform edge additions over non-edges.
std::pair<Graph, PerturbationRecord> random_flip_attack(const Graph& g,
                                                        double rate,
                                                        std::uint64_t seed);

// round(rate*m) additions sampled from pairs with different labels and
// Jaccard similarity below the median over existing edges.
std::pair<Graph, PerturbationRecord> heterophily_attack(const Graph& g,
                                                        double rate,
                                                        std::uint64_t seed);

Graph apply_record(const Graph& g, const PerturbationRecord& rec);
Graph invert_record(const Graph& g, const PerturbationRecord& rec);

}  // namespace perseus
