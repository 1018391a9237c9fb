#include <catch2/catch_amalgamated.hpp>

#include "ddfi/graph.hpp"
#include "ddfi/rng.hpp"

using namespace ddfi;

namespace {

std::vector<EdgePair> path_edges(NodeId n) {
  std::vector<EdgePair> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

LabelSet uniform_labels(std::vector<int> labels) {
  LabelSet ls;
  ls.labels = std::move(labels);
  ls.split.assign(ls.labels.size(), Split::train);
  return ls;
}

} // namespace

TEST_CASE("build_graph dedups, drops self-loops, symmetrizes") {
  std::vector<EdgePair> pairs{{0, 1}, {1, 0}, {2, 2}};
  const SparseGraph g = build_graph(pairs, 3);
  REQUIRE(g.num_edges() == 1);
  REQUIRE(g.has_edge(0, 1));
  REQUIRE(g.has_edge(1, 0));
  REQUIRE_FALSE(g.has_edge(2, 2));
  REQUIRE(g.degree(2) == 0);
}

TEST_CASE("build_graph empty input gives isolated nodes") {
  const SparseGraph g = build_graph(std::vector<EdgePair>{}, 4);
  REQUIRE(g.num_nodes == 4);
  REQUIRE(g.num_edges() == 0);
  for (std::size_t u = 0; u < 4; ++u) REQUIRE(g.degree(u) == 0);
}

TEST_CASE("build_graph path degrees") {
  const SparseGraph g = build_graph(path_edges(3), 3);
  REQUIRE(g.degree(0) == 1);
  REQUIRE(g.degree(1) == 2);
  REQUIRE(g.degree(2) == 1);
  REQUIRE(g.neighbors.size() == 4); // 2 x undirected edge count
}

TEST_CASE("build_graph rejects out-of-range ids") {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs{{0, 5}};
  REQUIRE_THROWS_AS(build_graph(std::span<const std::pair<std::int64_t, std::int64_t>>(pairs), 3),
                    InputError);
}

TEST_CASE("normalized_adjacency weights") {
  SECTION("single edge: both degrees 1") {
    const auto adj = normalized_adjacency(build_graph(std::vector<EdgePair>{{0, 1}}, 2));
    REQUIRE(adj.row_weights(0)[0] == Catch::Approx(1.0));
  }
  SECTION("path: endpoint-middle weight is 1/sqrt(2)") {
    const auto adj = normalized_adjacency(build_graph(path_edges(3), 3));
    REQUIRE(adj.row_weights(0)[0] == Catch::Approx(1.0 / std::sqrt(2.0)));
  }
  SECTION("star with center degree 4") {
    std::vector<EdgePair> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    const auto adj = normalized_adjacency(build_graph(star, 5));
    for (double w : adj.row_weights(0)) REQUIRE(w == Catch::Approx(0.5));
  }
  SECTION("weights symmetric and in (0, 1]") {
    Rng rng(7);
    std::vector<EdgePair> pairs;
    for (int i = 0; i < 60; ++i)
      pairs.emplace_back(static_cast<NodeId>(rng.below(30)), static_cast<NodeId>(rng.below(30)));
    const SparseGraph g = build_graph(pairs, 30);
    const auto adj = normalized_adjacency(g);
    for (std::size_t u = 0; u < g.num_nodes; ++u) {
      const auto nbrs = adj.row(u);
      const auto ws = adj.row_weights(u);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        REQUIRE(ws[e] > 0.0);
        REQUIRE(ws[e] <= 1.0);
        const NodeId v = nbrs[e];
        const auto back = adj.row(v);
        const auto pos = std::lower_bound(back.begin(), back.end(), static_cast<NodeId>(u));
        REQUIRE(adj.row_weights(v)[static_cast<std::size_t>(pos - back.begin())] ==
                Catch::Approx(ws[e]));
      }
    }
  }
}

TEST_CASE("spmm basics") {
  SECTION("single edge swaps rows via unit weights") {
    const auto adj = normalized_adjacency(build_graph(std::vector<EdgePair>{{0, 1}}, 2));
    Matrix x(2, 1);
    x(0, 0) = 3.0;
    x(1, 0) = 5.0;
    const Matrix y = spmm(adj, x);
    REQUIRE(y(0, 0) == Catch::Approx(5.0));
    REQUIRE(y(1, 0) == Catch::Approx(3.0));
  }
  SECTION("isolated node rows are zero") {
    const auto adj = normalized_adjacency(build_graph(std::vector<EdgePair>{{0, 1}}, 3));
    Matrix x(3, 2, 1.0);
    const Matrix y = spmm(adj, x);
    REQUIRE(y(2, 0) == 0.0);
    REQUIRE(y(2, 1) == 0.0);
  }
  SECTION("path against hand-multiplied dense matrix") {
    const auto adj = normalized_adjacency(build_graph(path_edges(3), 3));
    Matrix x(3, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 0.0;
    x(2, 0) = 1.0;
    const Matrix y = spmm(adj, x);
    REQUIRE(y(0, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(y(1, 0) == Catch::Approx(2.0 / std::sqrt(2.0)));
    REQUIRE(y(2, 0) == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("dimension mismatch is an input error") {
    const auto adj = normalized_adjacency(build_graph(std::vector<EdgePair>{{0, 1}}, 2));
    REQUIRE_THROWS_AS(spmm(adj, Matrix(3, 1)), InputError);
  }
}

TEST_CASE("spmm row sums on a regular graph are exactly 1") {
  // 4-cycle is 2-regular: each row of A-tilde sums to d * 1/d = 1.
  std::vector<EdgePair> cycle{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const auto adj = normalized_adjacency(build_graph(cycle, 4));
  const Matrix ones(4, 1, 1.0);
  const Matrix y = spmm(adj, ones);
  for (std::size_t u = 0; u < 4; ++u) REQUIRE(y(u, 0) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("connected_components") {
  REQUIRE(count_components(build_graph(path_edges(3), 3)) == 1);
  REQUIRE(count_components(build_graph(std::vector<EdgePair>{{0, 1}, {2, 3}}, 4)) == 2);
  REQUIRE(count_components(build_graph(std::vector<EdgePair>{}, 4)) == 4);
}

TEST_CASE("component count never increases as edges are added") {
  Rng rng(11);
  std::vector<EdgePair> pairs;
  std::size_t prev = 40;
  for (int step = 0; step < 50; ++step) {
    pairs.emplace_back(static_cast<NodeId>(rng.below(40)), static_cast<NodeId>(rng.below(40)));
    const std::size_t now = count_components(build_graph(pairs, 40));
    REQUIRE(now <= prev);
    prev = now;
  }
}

TEST_CASE("homophily_index") {
  SECTION("triangle, all same label") {
    const SparseGraph g = build_graph(std::vector<EdgePair>{{0, 1}, {1, 2}, {0, 2}}, 3);
    REQUIRE(homophily_index(g, uniform_labels({1, 1, 1})) == 1.0);
  }
  SECTION("single edge, different labels") {
    const SparseGraph g = build_graph(std::vector<EdgePair>{{0, 1}}, 2);
    REQUIRE(homophily_index(g, uniform_labels({0, 1})) == 0.0);
  }
  SECTION("4-cycle with labels a,a,b,b") {
    const SparseGraph g = build_graph(std::vector<EdgePair>{{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4);
    REQUIRE(homophily_index(g, uniform_labels({0, 0, 1, 1})) == 0.5);
  }
  SECTION("zero countable edges is vacuously 1") {
    const SparseGraph g = build_graph(std::vector<EdgePair>{}, 3);
    REQUIRE(homophily_index(g, uniform_labels({0, 1, 2})) == 1.0);
    // edges exist but all touch unknown-label nodes
    const SparseGraph g2 = build_graph(std::vector<EdgePair>{{0, 1}}, 2);
    REQUIRE(homophily_index(g2, uniform_labels({kUnknownLabel, 3})) == 1.0);
  }
  SECTION("invariant under label permutation") {
    Rng rng(5);
    std::vector<EdgePair> pairs;
    for (int i = 0; i < 80; ++i)
      pairs.emplace_back(static_cast<NodeId>(rng.below(25)), static_cast<NodeId>(rng.below(25)));
    const SparseGraph g = build_graph(pairs, 25);
    std::vector<int> labels(25);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    const double before = homophily_index(g, uniform_labels(labels));
    // permutation 0->2, 1->0, 2->1
    std::vector<int> permuted(labels);
    for (auto& l : permuted) l = (l + 2) % 3;
    REQUIRE(homophily_index(g, uniform_labels(permuted)) == before);
  }
}
