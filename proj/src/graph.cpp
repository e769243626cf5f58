#include "a3gcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace a3gcn {

SparseGraph build_graph(int num_nodes, const EdgeList& edges) {
  if (num_nodes < 0) throw std::invalid_argument("build_graph: negative node count");

  std::vector<std::pair<int, int>> canon;
  canon.reserve(edges.edges.size());
  for (const auto& [u, v] : edges.edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      throw std::invalid_argument("build_graph: edge endpoint out of range: (" +
                                  std::to_string(u) + ", " + std::to_string(v) + ")");
    if (u == v)
      throw std::invalid_argument("build_graph: self-loop in raw edge list at node " +
                                  std::to_string(u));
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  SparseGraph g;
  g.num_nodes = num_nodes;
  g.row_offsets.assign(num_nodes + 1, 0);
  for (const auto& [u, v] : canon) {
    ++g.row_offsets[u + 1];
    ++g.row_offsets[v + 1];
  }
  for (int i = 0; i < num_nodes; ++i) g.row_offsets[i + 1] += g.row_offsets[i];

  g.col_indices.resize(canon.size() * 2);
  std::vector<int> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
  for (const auto& [u, v] : canon) {
    g.col_indices[cursor[u]++] = v;
    g.col_indices[cursor[v]++] = u;
  }
  // Mirrored inserts of a sorted pair list leave each row sorted already for
  // the v side but not the u side; sort per row to make it unconditional.
  for (int i = 0; i < num_nodes; ++i)
    std::sort(g.col_indices.begin() + g.row_offsets[i],
              g.col_indices.begin() + g.row_offsets[i + 1]);

  g.edge_values.assign(g.col_indices.size(), 1.0);
  g.is_normalized = false;
  return g;
}

SparseGraph normalize_adjacency(const SparseGraph& g) {
  if (g.is_normalized)
    throw std::invalid_argument("normalize_adjacency: graph already normalized");

  const int n = g.num_nodes;
  std::vector<double> deg(n);  // self-looped degree d~
  for (int u = 0; u < n; ++u) deg[u] = static_cast<double>(g.degree(u) + 1);

  SparseGraph out;
  out.num_nodes = n;
  out.row_offsets.assign(n + 1, 0);
  for (int u = 0; u < n; ++u) out.row_offsets[u + 1] = out.row_offsets[u] + g.degree(u) + 1;
  out.col_indices.resize(out.row_offsets[n]);
  out.edge_values.resize(out.row_offsets[n]);

  for (int u = 0; u < n; ++u) {
    int w = out.row_offsets[u];
    bool self_placed = false;
    for (int k = g.row_offsets[u]; k < g.row_offsets[u + 1]; ++k) {
      const int v = g.col_indices[k];
      if (!self_placed && v > u) {
        out.col_indices[w] = u;
        out.edge_values[w++] = 1.0 / deg[u];
        self_placed = true;
      }
      out.col_indices[w] = v;
      out.edge_values[w++] = 1.0 / std::sqrt(deg[u] * deg[v]);
    }
    if (!self_placed) {
      out.col_indices[w] = u;
      out.edge_values[w++] = 1.0 / deg[u];
    }
  }
  out.is_normalized = true;
  return out;
}

DenseMatrix spmm(const SparseGraph& g, const DenseMatrix& x) {
  if (!g.is_normalized) throw std::invalid_argument("spmm: graph is not normalized");
  if (x.rows() != g.num_nodes)
    throw std::invalid_argument("spmm: feature rows (" + std::to_string(x.rows()) +
                                ") != num_nodes (" + std::to_string(g.num_nodes) + ")");

  const int cols = x.cols();
  DenseMatrix out(g.num_nodes, cols, 0.0);

  std::vector<int> slots;
  for (int u = 0; u < g.num_nodes; ++u) {
    const int begin = g.row_offsets[u], end = g.row_offsets[u + 1];
    slots.resize(end - begin);
    for (int k = begin; k < end; ++k) slots[k - begin] = k;

    // Sort sources by (edge value, source row content). The key depends only
    // on values, never on node ids, so any relabeling visits the same addends
    // in the same order and floating-point sums come out bit-identical.
    std::sort(slots.begin(), slots.end(), [&](int a, int b) {
      if (g.edge_values[a] != g.edge_values[b]) return g.edge_values[a] < g.edge_values[b];
      const double* ra = x.row(g.col_indices[a]);
      const double* rb = x.row(g.col_indices[b]);
      return std::lexicographical_compare(ra, ra + cols, rb, rb + cols);
    });

    double* orow = out.row(u);
    for (int k : slots) {
      const double a = g.edge_values[k];
      const double* xrow = x.row(g.col_indices[k]);
      for (int c = 0; c < cols; ++c) orow[c] += a * xrow[c];
    }
  }
  return out;
}

}  // namespace a3gcn
