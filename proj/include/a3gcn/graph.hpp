#pragma once

#include <utility>
#include <vector>

#include "a3gcn/dense_matrix.hpp"

namespace a3gcn {

/// Canonical undirected edge list: each pair stored once with u < v,
/// no self-loops, no duplicates.
struct EdgeList {
  std::vector<std::pair<int, int>> edges;

  std::size_t size() const { return edges.size(); }
};

/// Undirected graph in symmetric CSR form. Rows are sorted by column id and
/// hold both directions of every edge. After normalize_adjacency the values
/// carry the symmetric normalization 1/sqrt(deg~(u) * deg~(v)) of the
/// self-looped adjacency, and every node has a self-loop entry.
struct SparseGraph {
  int num_nodes = 0;
  std::vector<int> row_offsets;   // length num_nodes + 1
  std::vector<int> col_indices;   // sorted ascending within each row
  std::vector<double> edge_values;
  bool is_normalized = false;

  int degree(int u) const { return row_offsets[u + 1] - row_offsets[u]; }
};

/// Builds the symmetric CSR for a raw (unnormalized) graph. Duplicate input
/// pairs collapse to one edge; edges may be given in either orientation.
/// Throws std::invalid_argument on out-of-range endpoints or self-loops.
SparseGraph build_graph(int num_nodes, const EdgeList& edges);

/// Returns a new graph with self-loops added and values set to
/// 1/sqrt(deg~(u) * deg~(v)), where deg~ counts the self-loop. The input
/// must not already be normalized. Isolated nodes end up with a single
/// self-loop entry of value 1.
SparseGraph normalize_adjacency(const SparseGraph& g);

/// Sparse-dense product: row u of the result is sum_v value(u,v) * x_v.
/// Requires a normalized graph and rows(x) == num_nodes.
///
/// Per-row accumulation runs in a canonical order keyed on edge value and
/// source-row content rather than node ids, so the result is exactly
/// invariant under relabeling of the nodes.
DenseMatrix spmm(const SparseGraph& g, const DenseMatrix& x);

}  // namespace a3gcn
