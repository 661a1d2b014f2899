#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "perseus/attacks.hpp"
#include "perseus/metrics.hpp"
#include "perseus/observation.hpp"
#include "perseus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace perseus;

namespace {

Graph quad_graph(std::vector<Edge> edges, Matd X, std::vector<int> y) {
  Graph g;
  g.n = static_cast<int>(X.rows());
  g.edges = std::move(edges);
  g.X = std::move(X);
  g.y = std::move(y);
  if (!g.y.empty()) g.C = *std::max_element(g.y.begin(), g.y.end()) + 1;
  g.finalize_edges();
  g.validate();
  return g;
}

std::set<Edge> edge_set(const Graph& g) {
  return {g.edges.begin(), g.edges.end()};
}

}  // namespace

TEST_CASE("sbm blocks are contiguous and sized n/blocks with remainder first") {
  const Graph g = sbm_generate(10, 3, 0.5, 0.1, 6, 0.0, 0);
  const std::vector<int> want{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  CHECK(g.y == want);
  CHECK(g.C == 3);
  CHECK(g.n == 10);
  CHECK(g.feature_dim() == 6);
}

TEST_CASE("sbm with p_out zero never crosses blocks") {
  const Graph g = sbm_generate(60, 2, 0.4, 0.0, 8, 0.0, 1);
  for (const auto& [u, v] : g.edges) CHECK(g.y[u] == g.y[v]);
  CHECK(g.m() > 0);
}

TEST_CASE("unflipped sbm features are exact block indicators") {
  const Graph g = sbm_generate(40, 2, 0.3, 0.05, 10, 0.0, 2);
  const Matd J = jaccard_matrix(g);
  for (int u = 0; u < g.n; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      CHECK(J(u, v) == (g.y[u] == g.y[v] ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("flipped sbm features stay binary") {
  const Graph g = sbm_generate(30, 2, 0.3, 0.05, 12, 0.3, 3);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.feature_dim(); ++j) {
      const double x = g.X(i, j);
      CHECK((x == 0.0 || x == 1.0));
    }
  }
  // flips must actually occur at this rate
  const Matd J = jaccard_matrix(g);
  bool some_same_block_below_one = false;
  for (int u = 0; u < g.n && !some_same_block_below_one; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      if (g.y[u] == g.y[v] && J(u, v) < 1.0) {
        some_same_block_below_one = true;
        break;
      }
    }
  }
  CHECK(some_same_block_below_one);
}

TEST_CASE("sbm edge count sits inside the binomial envelope") {
  const Graph g = sbm_generate(400, 2, 0.1, 0.01, 64, 0.05, 0);
  const double within_pairs = 2.0 * (200.0 * 199.0 / 2.0);
  const double cross_pairs = 200.0 * 200.0;
  const double mean = within_pairs * 0.1 + cross_pairs * 0.01;
  const double var = within_pairs * 0.1 * 0.9 + cross_pairs * 0.01 * 0.99;
  CHECK(std::abs(g.m() - mean) < 4.0 * std::sqrt(var));
}

TEST_CASE("sbm is deterministic per seed") {
  const Graph a = sbm_generate(50, 2, 0.2, 0.02, 8, 0.1, 7);
  const Graph b = sbm_generate(50, 2, 0.2, 0.02, 8, 0.1, 7);
  const Graph c = sbm_generate(50, 2, 0.2, 0.02, 8, 0.1, 8);
  CHECK(a.edges == b.edges);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.y == b.y);
  CHECK((a.edges != c.edges || (a.X - c.X).cwiseAbs().maxCoeff() > 0.0));
}

TEST_CASE("sbm parameter validation") {
  CHECK_THROWS_AS(sbm_generate(10, 1, 0.5, 0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(2, 3, 0.5, 0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.1, 0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.05, 0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 1.5, 0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.5, -0.1, 4, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.5, 0.1, 0, 0.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.5, 0.1, 4, 1.0, 0), validation_error);
  CHECK_THROWS_AS(sbm_generate(10, 2, 0.5, 0.1, 4, -0.1, 0), validation_error);
}

TEST_CASE("random flip adds exactly round(rate*m) fresh edges") {
  const Graph g = sbm_generate(80, 2, 0.2, 0.02, 8, 0.05, 4);
  const double rate = 0.2;
  const auto [attacked, rec] = random_flip_attack(g, rate, 9);
  const long want = std::llround(rate * g.m());
  CHECK(static_cast<long>(rec.added.size()) == want);
  CHECK(rec.removed.empty());
  CHECK(rec.rate == rate);
  CHECK(attacked.m() == g.m() + static_cast<int>(want));
  CHECK(std::is_sorted(rec.added.begin(), rec.added.end()));
  for (const auto& [u, v] : rec.added) {
    CHECK_FALSE(g.has_edge(u, v));
    CHECK(attacked.has_edge(u, v));
  }
  // clean edges survive untouched
  for (const auto& [u, v] : g.edges) CHECK(attacked.has_edge(u, v));
  CHECK((attacked.X - g.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(attacked.y == g.y);
}

TEST_CASE("random flip is deterministic per seed") {
  const Graph g = sbm_generate(60, 2, 0.2, 0.02, 8, 0.05, 5);
  const auto [a1, r1] = random_flip_attack(g, 0.3, 17);
  const auto [a2, r2] = random_flip_attack(g, 0.3, 17);
  const auto [a3, r3] = random_flip_attack(g, 0.3, 18);
  CHECK(r1.added == r2.added);
  CHECK(a1.edges == a2.edges);
  CHECK(r1.added != r3.added);
}

TEST_CASE("random flip with a vanishing budget is the identity") {
  const Graph g = sbm_generate(40, 2, 0.3, 0.05, 8, 0.0, 6);
  const auto [attacked, rec] = random_flip_attack(g, 1e-12, 0);
  CHECK(rec.added.empty());
  CHECK(rec.removed.empty());
  CHECK(attacked.edges == g.edges);
}

TEST_CASE("random flip rejects bad rates and exhausted pools") {
  const Graph g = sbm_generate(40, 2, 0.3, 0.05, 8, 0.0, 6);
  CHECK_THROWS_AS(random_flip_attack(g, 0.0, 0), validation_error);
  CHECK_THROWS_AS(random_flip_attack(g, -0.1, 0), validation_error);
  CHECK_THROWS_AS(random_flip_attack(g, 1.5, 0), validation_error);

  // complete graph: no non-edge left to add
  std::vector<Edge> all;
  for (int u = 0; u < 5; ++u) {
    for (int v = u + 1; v < 5; ++v) all.emplace_back(u, v);
  }
  const Graph k5 = quad_graph(all, Matd::Ones(5, 2), {});
  CHECK_THROWS_AS(random_flip_attack(k5, 0.5, 0), validation_error);
}

TEST_CASE("heterophily targets dissimilar cross-label pairs only") {
  const Graph g = sbm_generate(80, 2, 0.2, 0.01, 8, 0.0, 10);
  const Matd J = jaccard_matrix(g);
  std::vector<double> sims;
  for (const auto& [u, v] : g.edges) sims.push_back(J(u, v));
  std::sort(sims.begin(), sims.end());
  const std::size_t m = sims.size();
  const double median = m % 2 == 1
                            ? sims[m / 2]
                            : 0.5 * (sims[m / 2 - 1] + sims[m / 2]);

  const double rate = 0.2;
  const auto [attacked, rec] = heterophily_attack(g, rate, 11);
  CHECK(static_cast<long>(rec.added.size()) == std::llround(rate * g.m()));
  CHECK(rec.removed.empty());
  for (const auto& [u, v] : rec.added) {
    CHECK(g.y[u] != g.y[v]);
    CHECK(J(u, v) < median);
    CHECK_FALSE(g.has_edge(u, v));
  }
  CHECK(attacked.m() == g.m() + static_cast<int>(rec.added.size()));
}

TEST_CASE("heterophily is deterministic per seed") {
  const Graph g = sbm_generate(60, 2, 0.2, 0.02, 8, 0.05, 12);
  const auto [a1, r1] = heterophily_attack(g, 0.2, 3);
  const auto [a2, r2] = heterophily_attack(g, 0.2, 3);
  const auto [a3, r3] = heterophily_attack(g, 0.2, 4);
  CHECK(r1.added == r2.added);
  CHECK(a1.edges == a2.edges);
  CHECK(r1.added != r3.added);
}

TEST_CASE("heterophily exhaustion reports what was achievable") {
  // labels 0,0,1,1; all cross pairs but {1,3} are already edges, and the
  // feature design puts exactly J(1,3)=0 under the edge-median of 1/3
  Matd X(4, 4);
  X << 1, 0, 0, 1,
       1, 0, 0, 1,
       0, 1, 0, 1,
       0, 0, 1, 0;
  const Graph g = quad_graph({{0, 1}, {2, 3}, {0, 2}, {0, 3}, {1, 2}}, X,
                             {0, 0, 1, 1});
  try {
    heterophily_attack(g, 1.0, 0);
    FAIL("expected pool_exhausted_error");
  } catch (const pool_exhausted_error& e) {
    CHECK(e.achievable == 1);
  }

  // and with every cross pair present the pool is empty
  Matd X2(4, 2);
  X2 << 1, 0,
        1, 0,
        0, 1,
        0, 1;
  const Graph full = quad_graph(
      {{0, 1}, {2, 3}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}, X2, {0, 0, 1, 1});
  try {
    heterophily_attack(full, 1.0, 0);
    FAIL("expected pool_exhausted_error");
  } catch (const pool_exhausted_error& e) {
    CHECK(e.achievable == 0);
  }
}

TEST_CASE("heterophily validation") {
  const Graph g = sbm_generate(20, 2, 0.4, 0.05, 4, 0.0, 13);
  CHECK_THROWS_AS(heterophily_attack(g, 0.0, 0), validation_error);
  CHECK_THROWS_AS(heterophily_attack(g, 1.5, 0), validation_error);
  Graph unlabeled = g;
  unlabeled.y.clear();
  CHECK_THROWS_AS(heterophily_attack(unlabeled, 0.2, 0), validation_error);
  Graph empty = g;
  empty.edges.clear();
  CHECK_THROWS_AS(heterophily_attack(empty, 0.2, 0), validation_error);
}

TEST_CASE("apply and invert are exact inverses") {
  const Graph g = sbm_generate(50, 2, 0.2, 0.02, 8, 0.05, 14);
  const auto [attacked, rec] = heterophily_attack(g, 0.3, 15);
  const Graph replayed = apply_record(g, rec);
  CHECK(replayed.edges == attacked.edges);
  const Graph restored = invert_record(attacked, rec);
  CHECK(restored.edges == g.edges);
  CHECK((restored.X - g.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(restored.y == g.y);
  CHECK(edge_set(restored) == edge_set(g));
}

TEST_CASE("apply_record rejects inconsistent records") {
  const Graph g =
      quad_graph({{0, 1}, {1, 2}}, Matd::Ones(3, 2), {0, 1, 0});
  PerturbationRecord dup;
  dup.added = {{0, 1}};
  CHECK_THROWS_AS(apply_record(g, dup), validation_error);
  PerturbationRecord ghost;
  ghost.removed = {{0, 2}};
  CHECK_THROWS_AS(apply_record(g, ghost), validation_error);
}

TEST_CASE("ratio curve of a perfect ranking hugs zero then jumps") {
  // 50 clean + 10 injected edges; perfect metric ranks every injected edge last
  std::vector<Edge> ranking;
  for (int i = 0; i < 50; ++i) ranking.push_back(make_edge(100 + i, 200 + i));
  PerturbationRecord rec;
  for (int i = 0; i < 10; ++i) rec.added.push_back(make_edge(300 + i, 400 + i));
  std::sort(rec.added.begin(), rec.added.end());
  ranking.insert(ranking.end(), rec.added.begin(), rec.added.end());

  const RatioCurve c = perturbed_ratio_curve(ranking, rec, 0.05);
  REQUIRE(c.grid.size() == 20);
  CHECK(c.grid.front() == 0.05);
  CHECK(c.grid.back() == 1.0);
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    CHECK(c.k[i] == std::llround(c.grid[i] * 60));
    CHECK(c.r_p[i] + c.r_o[i] == doctest::Approx(1.0).epsilon(1e-15));
    if (c.grid[i] <= 0.8 + 1e-9) {
      CHECK(c.r_p[i] == 0.0);
    }
  }
  CHECK(c.r_p.back() == doctest::Approx(10.0 / 60.0).epsilon(1e-15));

  // the mirror-image ranking loads the injected edges up front
  std::vector<Edge> worst(rec.added);
  for (int i = 0; i < 50; ++i) worst.push_back(make_edge(100 + i, 200 + i));
  const RatioCurve w = perturbed_ratio_curve(worst, rec, 0.05);
  CHECK(w.r_p.front() == 1.0);
  CHECK(curve_auc(c) < curve_auc(w));
  CHECK(curve_auc(c) < 0.1);
  // analytic value: integral of min(1, 10/(60r)) over [0.05,1] / 0.95 = 0.437
  CHECK(curve_auc(w) == doctest::Approx(0.4367).epsilon(5e-3));
}

TEST_CASE("ratio curve of random rankings matches the hypergeometric mean") {
  std::vector<Edge> base;
  for (int i = 0; i < 50; ++i) base.push_back(make_edge(100 + i, 200 + i));
  PerturbationRecord rec;
  for (int i = 0; i < 10; ++i) rec.added.push_back(make_edge(300 + i, 400 + i));
  std::sort(rec.added.begin(), rec.added.end());
  base.insert(base.end(), rec.added.begin(), rec.added.end());

  Rng rng(31);
  double sum = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    std::vector<Edge> shuffled = base;
    rng.shuffle(shuffled);
    const RatioCurve c = perturbed_ratio_curve(shuffled, rec, 0.05);
    const auto it = std::find(c.grid.begin(), c.grid.end(), 0.5);
    REQUIRE(it != c.grid.end());
    sum += c.r_p[it - c.grid.begin()];
  }
  CHECK(std::abs(sum / trials - 10.0 / 60.0) < 0.03);
}

TEST_CASE("ratio curve drops grid points whose prefix rounds to zero") {
  const std::vector<Edge> ranking{{0, 1}, {1, 2}, {2, 3}};
  PerturbationRecord rec;
  rec.added = {{2, 3}};
  const RatioCurve c = perturbed_ratio_curve(ranking, rec, 0.05);
  REQUIRE_FALSE(c.grid.empty());
  CHECK(c.grid.front() == 0.2);  // llround(0.15*3) is still zero
  for (int k : c.k) CHECK(k >= 1);
  CHECK(c.grid.back() == 1.0);
  CHECK(c.k.back() == 3);
  CHECK(c.r_p.back() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("ratio curve input validation") {
  const std::vector<Edge> ranking{{0, 1}, {1, 2}};
  PerturbationRecord rec;
  rec.added = {{5, 6}};  // not part of the ranking
  CHECK_THROWS_AS(perturbed_ratio_curve(ranking, rec, 0.05), validation_error);
  PerturbationRecord ok;
  ok.added = {{0, 1}};
  CHECK_THROWS_AS(perturbed_ratio_curve(ranking, ok, 0.0), validation_error);
  CHECK_THROWS_AS(perturbed_ratio_curve(ranking, ok, 1.5), validation_error);
  CHECK_THROWS_AS(perturbed_ratio_curve(std::vector<Edge>{}, ok, 0.05),
                  validation_error);
}

TEST_CASE("score-table overload agrees with the raw ranking call") {
  const Graph clean = sbm_generate(60, 2, 0.3, 0.02, 16, 0.05, 20);
  const auto [attacked, rec] = heterophily_attack(clean, 0.25, 21);
  const EdgeScoreTable table =
      score_edges(attacked, Metric::centrality, GloHomConfig{});
  const RatioCurve a = perturbed_ratio_curve(table, rec);
  const RatioCurve b = perturbed_ratio_curve(table.ranking, rec);
  CHECK(a.grid == b.grid);
  CHECK(a.k == b.k);
  CHECK(a.r_p == b.r_p);
}

TEST_CASE("curve_auc normalizes by the grid span") {
  RatioCurve c;
  c.grid = {0.5, 1.0};
  c.k = {1, 2};
  c.r_p = {0.0, 1.0};
  c.r_o = {1.0, 0.0};
  CHECK(curve_auc(c) == doctest::Approx(0.5).epsilon(1e-15));

  RatioCurve flat;
  flat.grid = {0.2, 0.6, 1.0};
  flat.k = {1, 2, 3};
  flat.r_p = {0.25, 0.25, 0.25};
  flat.r_o = {0.75, 0.75, 0.75};
  CHECK(curve_auc(flat) == doctest::Approx(0.25).epsilon(1e-15));

  RatioCurve single;
  single.grid = {1.0};
  single.k = {3};
  single.r_p = {0.3};
  single.r_o = {0.7};
  CHECK_THROWS_AS(curve_auc(single), validation_error);
}

TEST_CASE("injected heterophily edges land at the hard end for glohom") {
  const Graph clean = sbm_generate(200, 2, 0.1, 0.01, 32, 0.05, 0);
  const auto [attacked, rec] = heterophily_attack(clean, 0.2, 1);
  const EdgeScoreTable glo =
      score_edges(attacked, Metric::glohom, GloHomConfig{});
  const RatioCurve c = perturbed_ratio_curve(glo, rec);
  const std::vector<Edge> rnd = random_ranking(attacked, 5);
  const RatioCurve r = perturbed_ratio_curve(rnd, rec);
  CHECK(curve_auc(c) < curve_auc(r));
}
