#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "perseus/graph.hpp"
#include "perseus/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

using namespace perseus;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("perseus_graph_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  static inline int counter = 0;
};

Graph random_graph(int n, double p, std::uint64_t seed, int d_f = 3) {
  Rng rng(seed);
  Graph g;
  g.n = n;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) g.edges.emplace_back(u, v);
    }
  }
  g.X = Matd::Zero(n, d_f);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d_f; ++j) g.X(i, j) = rng.gauss();
  }
  return g;
}

// independent union-find to cross-check component extraction
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("load_graph dedups and drops self-loops") {
  TempDir tmp;
  const auto edges = tmp.file("e.tsv", "0\t1\n1\t0\n2\t2\n");
  const auto feats = tmp.file("x.csv", "3,2\n1,0\n0,1\n1,1\n");
  LoadStats stats;
  const Graph g = load_graph(edges, feats, "", &stats);
  CHECK(g.n == 3);
  CHECK(g.edges == std::vector<Edge>{{0, 1}});
  CHECK(stats.self_loops_dropped == 1);
  CHECK(stats.duplicates_merged == 1);
  CHECK(g.X(2, 1) == 1.0);
  CHECK_FALSE(g.has_labels());
}

TEST_CASE("load_graph empty edge file") {
  TempDir tmp;
  const auto edges = tmp.file("e.tsv", "");
  const auto feats = tmp.file("x.csv", "4,1\n0\n1\n2\n3\n");
  const Graph g = load_graph(edges, feats);
  CHECK(g.n == 4);
  CHECK(g.m() == 0);
}

TEST_CASE("load_graph labels, with and without header") {
  TempDir tmp;
  const auto edges = tmp.file("e.tsv", "0\t1\n");
  const auto feats = tmp.file("x.csv", "2,1\n0\n1\n");
  const auto labs = tmp.file("y.csv", "node_id,label\n0,1\n1,0\n");
  const Graph g = load_graph(edges, feats, labs);
  CHECK(g.has_labels());
  CHECK(g.y == std::vector<int>{1, 0});
  CHECK(g.C == 2);

  const auto bare = tmp.file("y2.csv", "0,2\n1,0\n");
  CHECK(load_graph(edges, feats, bare).C == 3);
}

TEST_CASE("load_graph parse errors carry line numbers") {
  TempDir tmp;
  const auto feats = tmp.file("x.csv", "3,1\n0\n1\n2\n");

  const auto bad_edge = tmp.file("bad.tsv", "0\t1\n1 2\n");
  CHECK_THROWS_WITH_AS(load_graph(bad_edge, feats),
                       doctest::Contains("line 2"), parse_error);

  const auto bad_tok = tmp.file("tok.tsv", "0\tx\n");
  CHECK_THROWS_WITH_AS(load_graph(bad_tok, feats),
                       doctest::Contains("line 1"), parse_error);

  const auto oob = tmp.file("oob.tsv", "0\t7\n");
  CHECK_THROWS_AS(load_graph(oob, feats), validation_error);

  const auto short_feats = tmp.file("short.csv", "3,1\n0\n1\n");
  const auto ok_edges = tmp.file("ok.tsv", "0\t1\n");
  CHECK_THROWS_AS(load_graph(ok_edges, short_feats), dimension_error);

  const auto bad_head = tmp.file("head.csv", "height,weight\n");
  CHECK_THROWS_AS(load_graph(ok_edges, bad_head), parse_error);

  const auto wide_row = tmp.file("wide.csv", "2,2\n1,2\n1,2,3\n");
  CHECK_THROWS_WITH_AS(load_graph(ok_edges, wide_row),
                       doctest::Contains("line 3"), dimension_error);

  const auto bad_label = tmp.file("bady.csv", "0,0\n5,1\n");
  const auto feats2 = tmp.file("x2.csv", "2,1\n0\n1\n");
  CHECK_THROWS_AS(load_graph(ok_edges, feats2, bad_label), validation_error);

  const auto missing_label = tmp.file("missy.csv", "0,0\n");
  CHECK_THROWS_AS(load_graph(ok_edges, feats2, missing_label),
                  validation_error);
}

TEST_CASE("save/load round-trip is exact") {
  TempDir tmp;
  Graph g = random_graph(12, 0.3, 99);
  g.y.assign(12, 0);
  for (int i = 0; i < 12; ++i) g.y[i] = i % 3;
  g.C = 3;
  g.X(0, 0) = 1.0 / 3.0;  // exercise shortest-round-trip formatting
  g.X(1, 1) = 1e-17;
  g.finalize_edges();
  g.validate();

  const auto e = (tmp.path / "e.tsv").string();
  const auto x = (tmp.path / "x.csv").string();
  const auto y = (tmp.path / "y.csv").string();
  save_graph(g, e, x, y);
  const Graph h = load_graph(e, x, y);
  CHECK(h.n == g.n);
  CHECK(h.edges == g.edges);
  CHECK(h.y == g.y);
  CHECK(h.C == g.C);
  REQUIRE(h.X.rows() == g.X.rows());
  CHECK((h.X - g.X).cwiseAbs().maxCoeff() == 0.0);  // bit-exact round-trip
}

TEST_CASE("largest_connected_component picks the bigger side") {
  Graph g;
  g.n = 8;  // sizes 5 (0-4 path) and 3 (5-7 path)
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {5, 6}, {6, 7}};
  g.X = Matd::Identity(8, 8);
  const LccResult r = largest_connected_component(g);
  CHECK(r.graph.n == 5);
  CHECK(r.graph.m() == 4);
  CHECK(r.old_of_new == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(r.new_of_old[6] == -1);
  CHECK(r.graph.X(2, 2) == 1.0);  // features follow the relabeling
}

TEST_CASE("lcc on a connected graph is the identity") {
  Graph g = random_graph(6, 1.0, 3);
  const LccResult r = largest_connected_component(g);
  CHECK(r.graph.n == 6);
  CHECK(r.graph.edges == g.edges);
  for (int i = 0; i < 6; ++i) {
    CHECK(r.old_of_new[i] == i);
    CHECK(r.new_of_old[i] == i);
  }
}

TEST_CASE("lcc size ties go to the component with the smallest id") {
  Graph g;
  g.n = 8;
  g.edges = {{0, 2}, {2, 4}, {4, 6}, {1, 3}, {3, 5}, {5, 7}};
  g.X = Matd::Zero(8, 1);
  const LccResult r = largest_connected_component(g);
  CHECK(r.graph.n == 4);
  CHECK(r.old_of_new == std::vector<int>{0, 2, 4, 6});
}

TEST_CASE("lcc labels survive and empty graph rejects") {
  Graph g;
  g.n = 3;
  g.edges = {{1, 2}};
  g.X = Matd::Zero(3, 1);
  g.y = {2, 0, 1};
  g.C = 3;
  const LccResult r = largest_connected_component(g);
  CHECK(r.graph.y == std::vector<int>{0, 1});

  Graph empty;
  empty.X = Matd::Zero(0, 0);
  CHECK_THROWS_AS(largest_connected_component(empty), validation_error);
}

TEST_CASE("lcc matches an independent union-find oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = random_graph(40, 0.04, 1000 + seed);
    UnionFind uf(g.n);
    for (const auto& e : g.edges) uf.unite(e.first, e.second);
    std::map<int, int> sizes;
    for (int i = 0; i < g.n; ++i) ++sizes[uf.find(i)];
    int best = 0;
    for (const auto& [root, size] : sizes) best = std::max(best, size);
    const LccResult r = largest_connected_component(g);
    CHECK(r.graph.n == best);
    // the survivors really are one component under the oracle
    const int root = uf.find(r.old_of_new[0]);
    for (int old : r.old_of_new) CHECK(uf.find(old) == root);
  }
}

TEST_CASE("random_split floor sizes and determinism") {
  const Graph g = random_graph(100, 0.05, 5);
  const SplitMasks a = random_split(g, 0.1, 0.1, 0.8, 7);
  CHECK(a.train.size() == 10);
  CHECK(a.val.size() == 10);
  CHECK(a.test.size() == 80);

  const SplitMasks b = random_split(g, 0.1, 0.1, 0.8, 7);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  CHECK(random_split(g, 0.1, 0.1, 0.8, 8).train != a.train);

  std::set<int> all;
  all.insert(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 100);  // disjoint and exhaustive

  const Graph small = random_graph(10, 0.3, 6);
  const SplitMasks s = random_split(small, 0.1, 0.1, 0.8, 1);
  CHECK(s.train.size() == 1);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 8);
}

TEST_CASE("random_split validation") {
  const Graph g2 = random_graph(2, 1.0, 0);
  CHECK_THROWS_AS(random_split(g2, 0.3, 0.3, 0.4, 0), validation_error);
  const Graph g = random_graph(10, 0.3, 0);
  CHECK_THROWS_AS(random_split(g, 0.5, 0.5, 0.5, 0), validation_error);
}

TEST_CASE("normalize_adjacency hand examples") {
  WeightedAdjacency empty;
  empty.n = 2;
  CHECK(normalize_adjacency(empty).isApprox(Matd::Identity(2, 2)));

  WeightedAdjacency one;
  one.n = 2;
  one.w[{0, 1}] = 1.0;
  const Matd ah = normalize_adjacency(one);
  CHECK(ah.isApproxToConstant(0.5, 1e-15));
}

TEST_CASE("normalize_adjacency symmetry, isolated rows, spectrum") {
  Rng rng(42);
  WeightedAdjacency wa;
  wa.n = 9;  // node 8 stays isolated
  for (int u = 0; u < 8; ++u) {
    for (int v = u + 1; v < 8; ++v) {
      if (rng.bernoulli(0.4)) wa.w[{u, v}] = 0.25 + 0.75 * rng.unit();
    }
  }
  const Matd ah = normalize_adjacency(wa);
  CHECK((ah - ah.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(ah(8, 8) == 1.0);
  CHECK(ah.row(8).sum() == 1.0);

  Eigen::SelfAdjointEigenSolver<Matd> es(ah);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("normalize_adjacency rejects out-of-range weights") {
  WeightedAdjacency wa;
  wa.n = 2;
  wa.w[{0, 1}] = 0.0;
  CHECK_THROWS_AS(normalize_adjacency(wa), validation_error);
  wa.w[{0, 1}] = 1.5;
  CHECK_THROWS_AS(normalize_adjacency(wa), validation_error);
}

TEST_CASE("unit_weights matches the dense normalization path") {
  const Graph g = random_graph(7, 0.5, 11);
  const Matd via_map = normalize_adjacency(unit_weights(g));
  const Matd via_dense = normalize_adjacency_dense(adjacency_matrix(g));
  CHECK((via_map - via_dense).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("graph validate catches invariant breaches") {
  Graph g;
  g.n = 3;
  g.X = Matd::Zero(3, 1);
  g.edges = {{0, 3}};
  CHECK_THROWS_AS(g.validate(), validation_error);
  g.edges = {{1, 1}};
  CHECK_THROWS_AS(g.validate(), validation_error);
  g.edges = {{0, 1}};
  g.X = Matd::Zero(2, 1);
  CHECK_THROWS_AS(g.validate(), dimension_error);
  g.X = Matd::Zero(3, 1);
  g.y = {0, 1, 3};
  g.C = 3;
  CHECK_THROWS_AS(g.validate(), validation_error);
}
