#include "perseus/graph.hpp"

#include "perseus/detail/text.hpp"
#include "perseus/rng.hpp"

#include <numeric>

namespace perseus {

void Graph::validate() const {
  if (n < 0) throw validation_error("node count must be nonnegative");
  if (X.size() > 0 && X.rows() != n) {
    throw dimension_error("feature matrix has " + std::to_string(X.rows()) +
                          " rows for " + std::to_string(n) + " nodes");
  }
  Edge prev{-1, -1};
  for (const auto& e : edges) {
    if (e.first >= e.second) {
      throw validation_error("edge (" + std::to_string(e.first) + "," +
                             std::to_string(e.second) +
                             ") is not normalized or is a self-loop");
    }
    if (e.first < 0 || e.second >= n) {
      throw validation_error("edge endpoint out of range: (" +
                             std::to_string(e.first) + "," +
                             std::to_string(e.second) + ")");
    }
    if (!(prev < e)) throw validation_error("edge list not sorted/unique");
    prev = e;
  }
  if (!y.empty()) {
    if (static_cast<int>(y.size()) != n) {
      throw dimension_error("label vector size mismatch");
    }
    for (int i = 0; i < n; ++i) {
      if (y[i] < 0 || y[i] >= C) {
        throw validation_error("label out of range at node " +
                               std::to_string(i));
      }
    }
  }
}

Graph load_graph(const std::string& edge_list_path,
                 const std::string& features_path,
                 const std::string& labels_path, LoadStats* stats) {
  Graph g;
  LoadStats local;

  // features first: the header fixes n
  {
    auto lines = detail::read_lines(features_path);
    if (lines.empty()) throw parse_error(features_path + ": empty file");
    auto head = detail::split(lines[0], ',');
    if (head.size() != 2) {
      throw parse_error(features_path + " line 1: header must be n,d_f");
    }
    const int n = static_cast<int>(
        detail::parse_int(head[0], features_path + " line 1"));
    const int df = static_cast<int>(
        detail::parse_int(head[1], features_path + " line 1"));
    if (n < 0 || df < 0) {
      throw validation_error(features_path + ": negative dimensions");
    }
    if (static_cast<int>(lines.size()) - 1 != n) {
      throw dimension_error(features_path + ": header says " +
                            std::to_string(n) + " rows, file has " +
                            std::to_string(lines.size() - 1));
    }
    g.n = n;
    g.X.resize(n, df);
    for (int i = 0; i < n; ++i) {
      const std::string where =
          features_path + " line " + std::to_string(i + 2);
      auto toks = detail::split(lines[i + 1], ',');
      if (static_cast<int>(toks.size()) != df) {
        throw dimension_error(where + ": expected " + std::to_string(df) +
                              " fields, got " + std::to_string(toks.size()));
      }
      for (int j = 0; j < df; ++j) {
        g.X(i, j) = detail::parse_real(toks[j], where);
      }
    }
  }

  {
    auto lines = detail::read_lines(edge_list_path);
    for (std::size_t li = 0; li < lines.size(); ++li) {
      const std::string line = detail::trim(lines[li]);
      if (line.empty()) continue;
      const std::string where =
          edge_list_path + " line " + std::to_string(li + 1);
      auto toks = detail::split(line, '\t');
      if (toks.size() != 2) throw parse_error(where + ": expected u<TAB>v");
      const int u = static_cast<int>(detail::parse_int(toks[0], where));
      const int v = static_cast<int>(detail::parse_int(toks[1], where));
      if (u < 0 || v < 0 || u >= g.n || v >= g.n) {
        throw validation_error(where + ": endpoint out of range [0," +
                               std::to_string(g.n) + ")");
      }
      if (u == v) {
        ++local.self_loops_dropped;
        continue;
      }
      g.edges.push_back(make_edge(u, v));
    }
    const auto before = g.edges.size();
    g.finalize_edges();
    local.duplicates_merged = static_cast<int>(before - g.edges.size());
  }

  if (!labels_path.empty()) {
    auto lines = detail::read_lines(labels_path);
    g.y.assign(g.n, -1);
    for (std::size_t li = 0; li < lines.size(); ++li) {
      const std::string line = detail::trim(lines[li]);
      if (line.empty()) continue;
      if (li == 0 && line == "node_id,label") continue;
      const std::string where = labels_path + " line " + std::to_string(li + 1);
      auto toks = detail::split(line, ',');
      if (toks.size() != 2) throw parse_error(where + ": expected node_id,label");
      const int id = static_cast<int>(detail::parse_int(toks[0], where));
      const int lab = static_cast<int>(detail::parse_int(toks[1], where));
      if (id < 0 || id >= g.n) {
        throw validation_error(where + ": node id out of range");
      }
      if (lab < 0) throw validation_error(where + ": label id out of range");
      g.y[id] = lab;
    }
    int cmax = -1;
    for (int i = 0; i < g.n; ++i) {
      if (g.y[i] < 0) {
        throw validation_error(labels_path + ": node " + std::to_string(i) +
                               " has no label");
      }
      cmax = std::max(cmax, g.y[i]);
    }
    g.C = cmax + 1;
  }

  g.validate();
  if (stats) *stats = local;
  return g;
}

void save_graph(const Graph& g, const std::string& edge_list_path,
                const std::string& features_path,
                const std::string& labels_path) {
  std::string es;
  for (const auto& [u, v] : g.edges) {
    es += std::to_string(u) + "\t" + std::to_string(v) + "\n";
  }
  detail::write_file(edge_list_path, es);

  std::string fs = std::to_string(g.n) + "," +
                   std::to_string(g.feature_dim()) + "\n";
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.feature_dim(); ++j) {
      if (j) fs += ",";
      fs += detail::fmt_real(g.X(i, j));
    }
    fs += "\n";
  }
  detail::write_file(features_path, fs);

  if (!labels_path.empty()) {
    if (!g.has_labels()) {
      throw validation_error("save_graph: graph has no labels to save");
    }
    std::string ls = "node_id,label\n";
    for (int i = 0; i < g.n; ++i) {
      ls += std::to_string(i) + "," + std::to_string(g.y[i]) + "\n";
    }
    detail::write_file(labels_path, ls);
  }
}

LccResult largest_connected_component(const Graph& g) {
  if (g.n == 0) throw validation_error("largest_connected_component: empty graph");
  std::vector<int> root(g.n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int a) {
    while (root[a] != a) {
      root[a] = root[root[a]];
      a = root[a];
    }
    return a;
  };
  for (const auto& [u, v] : g.edges) {
    int ru = find(u), rv = find(v);
    if (ru != rv) root[std::max(ru, rv)] = std::min(ru, rv);
  }
  std::vector<int> size(g.n, 0);
  for (int i = 0; i < g.n; ++i) ++size[find(i)];
  // ties: with path compression to the smallest id, the best root with equal
  // size and smaller id wins automatically
  int best = 0;
  for (int r = 0; r < g.n; ++r) {
    if (size[r] > size[best]) best = r;
  }

  LccResult res;
  res.new_of_old.assign(g.n, -1);
  for (int i = 0; i < g.n; ++i) {
    if (find(i) == best) {
      res.new_of_old[i] = static_cast<int>(res.old_of_new.size());
      res.old_of_new.push_back(i);
    }
  }
  Graph& out = res.graph;
  out.n = static_cast<int>(res.old_of_new.size());
  out.X.resize(out.n, g.feature_dim());
  for (int i = 0; i < out.n; ++i) out.X.row(i) = g.X.row(res.old_of_new[i]);
  if (g.has_labels()) {
    out.y.resize(out.n);
    for (int i = 0; i < out.n; ++i) out.y[i] = g.y[res.old_of_new[i]];
    out.C = g.C;
  }
  for (const auto& [u, v] : g.edges) {
    if (res.new_of_old[u] >= 0 && res.new_of_old[v] >= 0) {
      out.edges.push_back(make_edge(res.new_of_old[u], res.new_of_old[v]));
    }
  }
  out.finalize_edges();
  out.validate();
  return res;
}

SplitMasks random_split(const Graph& g, double train_ratio, double val_ratio,
                        double test_ratio, std::uint64_t seed) {
  if (g.n < 3) throw validation_error("random_split needs at least 3 nodes");
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0 ||
      std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
    throw validation_error("split ratios must be nonnegative and sum to 1");
  }
  std::vector<int> perm(g.n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, /*stream=*/0x5917));
  rng.shuffle(perm);
  const int ntr = static_cast<int>(train_ratio * g.n);
  const int nva = static_cast<int>(val_ratio * g.n);
  SplitMasks masks;
  masks.train.assign(perm.begin(), perm.begin() + ntr);
  masks.val.assign(perm.begin() + ntr, perm.begin() + ntr + nva);
  masks.test.assign(perm.begin() + ntr + nva, perm.end());
  std::sort(masks.train.begin(), masks.train.end());
  std::sort(masks.val.begin(), masks.val.end());
  std::sort(masks.test.begin(), masks.test.end());
  return masks;
}

Matd adjacency_matrix(const Graph& g) {
  Matd A = Matd::Zero(g.n, g.n);
  for (const auto& [u, v] : g.edges) {
    A(u, v) = 1.0;
    A(v, u) = 1.0;
  }
  return A;
}

WeightedAdjacency unit_weights(const Graph& g) {
  WeightedAdjacency wa;
  wa.n = g.n;
  for (const auto& e : g.edges) wa.w[e] = 1.0;
  return wa;
}

Matd normalize_adjacency(const WeightedAdjacency& wa) {
  Matd W = Matd::Zero(wa.n, wa.n);
  for (const auto& [e, wt] : wa.w) {
    if (wt <= 0.0 || wt > 1.0) {
      throw validation_error("edge weight outside (0,1]");
    }
    W(e.first, e.second) = wt;
    W(e.second, e.first) = wt;
  }
  return normalize_adjacency_dense(W);
}

}  // namespace perseus
