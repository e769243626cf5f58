#include <doctest.h>

#include "a3gcn/graph.hpp"
#include "support.hpp"

using namespace a3gcn;

TEST_CASE("build_graph mirrors a single edge") {
  EdgeList e;
  e.edges = {{0, 1}};
  SparseGraph g = build_graph(2, e);
  CHECK(g.num_nodes == 2);
  CHECK(g.row_offsets == std::vector<int>{0, 1, 2});
  CHECK(g.col_indices == std::vector<int>{1, 0});
  CHECK(g.edge_values == std::vector<double>{1.0, 1.0});
  CHECK_FALSE(g.is_normalized);
}

TEST_CASE("build_graph with no edges gives empty rows") {
  SparseGraph g = build_graph(3, {});
  CHECK(g.row_offsets == std::vector<int>{0, 0, 0, 0});
  CHECK(g.col_indices.empty());
}

TEST_CASE("build_graph collapses duplicates and accepts either orientation") {
  EdgeList e;
  e.edges = {{0, 1}, {1, 0}, {0, 1}, {2, 1}};
  SparseGraph g = build_graph(3, e);
  CHECK(g.col_indices.size() == 4);  // two undirected edges, both directions
}

TEST_CASE("build_graph rejects bad input") {
  EdgeList out_of_range;
  out_of_range.edges = {{0, 5}};
  CHECK_THROWS_AS(build_graph(3, out_of_range), std::invalid_argument);
  EdgeList self_loop;
  self_loop.edges = {{1, 1}};
  CHECK_THROWS_AS(build_graph(3, self_loop), std::invalid_argument);
}

TEST_CASE("build_graph matches the dense symmetrized oracle") {
  Rng rng(42);
  EdgeList e = testutil::random_edges(5, 7, rng);
  SparseGraph g = build_graph(5, e);
  DenseMatrix got = oracle::csr_to_dense(g);
  DenseMatrix want = oracle::dense_adjacency(5, e);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(got(i, j) == want(i, j));
}

TEST_CASE("normalize_adjacency on an isolated node") {
  SparseGraph g = normalize_adjacency(build_graph(1, {}));
  CHECK(g.is_normalized);
  CHECK(g.col_indices == std::vector<int>{0});
  CHECK(g.edge_values == std::vector<double>{1.0});
}

TEST_CASE("normalize_adjacency on a single edge gives all 0.5") {
  EdgeList e;
  e.edges = {{0, 1}};
  SparseGraph g = normalize_adjacency(build_graph(2, e));
  REQUIRE(g.col_indices.size() == 4);
  for (double v : g.edge_values) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalize_adjacency matches the dense oracle elementwise") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    EdgeList e = testutil::random_edges(6, 8, rng);
    SparseGraph g = normalize_adjacency(build_graph(6, e));
    DenseMatrix got = oracle::csr_to_dense(g);
    DenseMatrix want = oracle::dense_normalized_adjacency(6, e);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        CHECK(std::abs(got(i, j) - want(i, j)) <= 1e-12);
  }
}

TEST_CASE("normalize_adjacency refuses an already-normalized graph") {
  SparseGraph g = normalize_adjacency(build_graph(2, {}));
  CHECK_THROWS_AS(normalize_adjacency(g), std::invalid_argument);
}

TEST_CASE("normalized values are exactly symmetric and degree-derived") {
  Rng rng(11);
  EdgeList e = testutil::random_edges(9, 14, rng);
  SparseGraph raw = build_graph(9, e);
  SparseGraph g = normalize_adjacency(raw);
  DenseMatrix dense = oracle::csr_to_dense(g);
  for (int u = 0; u < 9; ++u)
    for (int v = 0; v < 9; ++v) CHECK(dense(u, v) == dense(v, u));

  // re-derive every value from the raw degrees
  for (int u = 0; u < 9; ++u) {
    for (int k = g.row_offsets[u]; k < g.row_offsets[u + 1]; ++k) {
      const int v = g.col_indices[k];
      const double want =
          1.0 / std::sqrt(double(raw.degree(u) + 1) * double(raw.degree(v) + 1));
      CHECK(g.edge_values[k] == want);
    }
  }
}

TEST_CASE("spmm with only self-loops is the identity") {
  SparseGraph g = normalize_adjacency(build_graph(4, {}));
  Rng rng(3);
  DenseMatrix x = testutil::random_matrix(4, 3, rng);
  DenseMatrix y = spmm(g, x);
  CHECK(y == x);
}

TEST_CASE("spmm of zeros is zeros") {
  Rng rng(5);
  EdgeList e = testutil::random_edges(6, 7, rng);
  SparseGraph g = normalize_adjacency(build_graph(6, e));
  DenseMatrix y = spmm(g, DenseMatrix(6, 4, 0.0));
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == 0.0);
}

TEST_CASE("spmm matches the dense product") {
  Rng rng(17);
  EdgeList e = testutil::random_edges(8, 12, rng);
  SparseGraph g = normalize_adjacency(build_graph(8, e));
  DenseMatrix x = testutil::random_matrix(8, 3, rng);
  DenseMatrix got = spmm(g, x);
  DenseMatrix want = oracle::naive_matmul(oracle::dense_normalized_adjacency(8, e), x);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(testutil::rel_err(got(i, j), want(i, j)) < 1e-6);
}

TEST_CASE("spmm validates its inputs") {
  SparseGraph raw = build_graph(3, {});
  DenseMatrix x(3, 2, 1.0);
  CHECK_THROWS_AS(spmm(raw, x), std::invalid_argument);
  SparseGraph g = normalize_adjacency(raw);
  DenseMatrix wrong(4, 2, 1.0);
  CHECK_THROWS_AS(spmm(g, wrong), std::invalid_argument);
}

TEST_CASE("spmm against the identity reconstructs a symmetric dense adjacency") {
  Rng rng(23);
  EdgeList e = testutil::random_edges(7, 10, rng);
  SparseGraph g = normalize_adjacency(build_graph(7, e));
  DenseMatrix dense = spmm(g, DenseMatrix::identity(7));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) CHECK(dense(i, j) == dense(j, i));
}

TEST_CASE("spmm row depends only on the node's neighborhood") {
  Rng rng(29);
  EdgeList e = testutil::random_edges(10, 15, rng);
  SparseGraph g = normalize_adjacency(build_graph(10, e));
  DenseMatrix x = testutil::random_matrix(10, 4, rng);
  DenseMatrix full = spmm(g, x);

  const int u = 3;
  std::set<int> hood{u};
  for (int k = g.row_offsets[u]; k < g.row_offsets[u + 1]; ++k)
    hood.insert(g.col_indices[k]);
  DenseMatrix masked = x;
  for (int v = 0; v < 10; ++v)
    if (!hood.count(v))
      for (int j = 0; j < 4; ++j) masked(v, j) = 0.0;
  DenseMatrix partial = spmm(g, masked);
  for (int j = 0; j < 4; ++j) CHECK(partial(u, j) == full(u, j));
}

TEST_CASE("spmm is exactly invariant under node relabeling") {
  Rng rng(31);
  const int n = 12;
  EdgeList e = testutil::random_edges(n, 20, rng);
  DenseMatrix x = testutil::random_matrix(n, 5, rng);

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = 0; i < n; ++i)
    std::swap(perm[i], perm[i + rng.next_below(n - i)]);

  EdgeList pe;
  for (const auto& [u, v] : e.edges)
    pe.edges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
  DenseMatrix px(n, 5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 5; ++j) px(perm[i], j) = x(i, j);

  DenseMatrix base = spmm(normalize_adjacency(build_graph(n, e)), x);
  DenseMatrix permuted = spmm(normalize_adjacency(build_graph(n, pe)), px);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 5; ++j) CHECK(permuted(perm[i], j) == base(i, j));
}
