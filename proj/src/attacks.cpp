#include "perseus/attacks.hpp"

#include "perseus/metrics.hpp"
#include "perseus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace perseus {

namespace {
constexpr std::uint64_t kSbmStructure = 0x5b31;
constexpr std::uint64_t kSbmFeatures = 0x5b32;
constexpr std::uint64_t kAttackStream = 0xa77c;

int attack_budget(double rate, int m) {
  if (rate <= 0.0 || rate > 1.0) {
    throw validation_error("attack rate must lie in (0,1]");
  }
  return static_cast<int>(std::llround(rate * m));
}
}  // namespace

Graph sbm_generate(int n, int blocks, double p_in, double p_out,
                   int feature_dim, double flip_prob, std::uint64_t seed) {
  if (blocks < 2) throw validation_error("sbm: need at least 2 blocks");
  if (n < blocks) throw validation_error("sbm: need at least one node per block");
  if (!(p_in > p_out)) throw validation_error("sbm: requires p_in > p_out");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) {
    throw validation_error("sbm: edge probabilities must lie in [0,1]");
  }
  if (feature_dim < 1) throw validation_error("sbm: feature_dim must be >= 1");
  if (flip_prob < 0 || flip_prob >= 1) {
    throw validation_error("sbm: flip_prob must lie in [0,1)");
  }

  Graph g;
  g.n = n;
  g.C = blocks;
  g.y.resize(n);
  // contiguous blocks, remainder spread over the first blocks
  {
    int node = 0;
    for (int b = 0; b < blocks; ++b) {
      const int size = n / blocks + (b < n % blocks ? 1 : 0);
      for (int i = 0; i < size; ++i) g.y[node++] = b;
    }
  }

  Rng structure(derive_seed(seed, kSbmStructure));
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = g.y[u] == g.y[v] ? p_in : p_out;
      if (structure.bernoulli(p)) g.edges.emplace_back(u, v);
    }
  }

  const int per = feature_dim / blocks;
  g.X = Matd::Zero(n, feature_dim);
  Rng features(derive_seed(seed, kSbmFeatures));
  for (int i = 0; i < n; ++i) {
    const int b = g.y[i];
    for (int j = 0; j < feature_dim; ++j) {
      const bool indicator = per > 0 && j >= b * per && j < (b + 1) * per;
      const bool flip = features.bernoulli(flip_prob);
      g.X(i, j) = indicator != flip ? 1.0 : 0.0;
    }
  }
  g.validate();
  return g;
}

std::pair<Graph, PerturbationRecord> random_flip_attack(const Graph& g,
                                                        double rate,
                                                        std::uint64_t seed) {
  const int budget = attack_budget(rate, g.m());
  PerturbationRecord rec;
  rec.rate = rate;
  if (budget == 0) return {g, rec};

  std::vector<Edge> pool;
  for (int u = 0; u < g.n; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      if (!g.has_edge(u, v)) pool.emplace_back(u, v);
    }
  }
  if (static_cast<int>(pool.size()) < budget) {
    throw validation_error("random_flip_attack: not enough non-edges (" +
                           std::to_string(pool.size()) + " available, " +
                           std::to_string(budget) + " requested)");
  }
  Rng rng(derive_seed(seed, kAttackStream));
  rec.added = rng.sample(std::move(pool), budget);
  std::sort(rec.added.begin(), rec.added.end());
  return {apply_record(g, rec), rec};
}

std::pair<Graph, PerturbationRecord> heterophily_attack(const Graph& g,
                                                        double rate,
                                                        std::uint64_t seed) {
  if (!g.has_labels()) {
    throw validation_error("heterophily_attack: labels required");
  }
  if (g.m() == 0) {
    throw validation_error("heterophily_attack: graph has no edges");
  }
  const int budget = attack_budget(rate, g.m());
  const Matd J = jaccard_matrix(g);

  // median Jaccard over existing edges (average-of-middle-two for even m)
  std::vector<double> sims;
  sims.reserve(g.m());
  for (const auto& e : g.edges) sims.push_back(J(e.first, e.second));
  std::sort(sims.begin(), sims.end());
  const std::size_t mid = sims.size() / 2;
  const double median = sims.size() % 2 == 1
                            ? sims[mid]
                            : 0.5 * (sims[mid - 1] + sims[mid]);

  std::vector<Edge> pool;
  for (int u = 0; u < g.n; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      if (g.y[u] != g.y[v] && J(u, v) < median && !g.has_edge(u, v)) {
        pool.emplace_back(u, v);
      }
    }
  }
  if (static_cast<int>(pool.size()) < budget) {
    throw pool_exhausted_error(
        "heterophily_attack: candidate pool holds only " +
            std::to_string(pool.size()) + " pairs of the " +
            std::to_string(budget) + " requested",
        static_cast<int>(pool.size()));
  }
  PerturbationRecord rec;
  rec.rate = rate;
  Rng rng(derive_seed(seed, kAttackStream));
  rec.added = rng.sample(std::move(pool), budget);
  std::sort(rec.added.begin(), rec.added.end());
  return {apply_record(g, rec), rec};
}

Graph apply_record(const Graph& g, const PerturbationRecord& rec) {
  Graph out = g;
  for (const auto& e : rec.added) {
    if (g.has_edge(e.first, e.second)) {
      throw validation_error("record adds an edge already present");
    }
    out.edges.push_back(e);
  }
  if (!rec.removed.empty()) {
    std::vector<Edge> keep;
    keep.reserve(out.edges.size());
    for (const auto& e : out.edges) {
      if (!std::binary_search(rec.removed.begin(), rec.removed.end(), e)) {
        keep.push_back(e);
      }
    }
    if (keep.size() + rec.removed.size() != out.edges.size()) {
      throw validation_error("record removes an edge that is not present");
    }
    out.edges = std::move(keep);
  }
  out.finalize_edges();
  out.validate();
  return out;
}

Graph invert_record(const Graph& g, const PerturbationRecord& rec) {
  PerturbationRecord inv;
  inv.rate = rec.rate;
  inv.added = rec.removed;
  inv.removed = rec.added;
  return apply_record(g, inv);
}

}  // namespace perseus
