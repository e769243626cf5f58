#include "a3gcn/augment.hpp"

#include <stdexcept>

namespace a3gcn {

EdgeList edge_drop(const EdgeList& edges, double p_drop, Rng& rng) {
  if (p_drop < 0.0 || p_drop > 1.0)
    throw std::invalid_argument("edge_drop: p_drop must be in [0, 1]");
  EdgeList kept;
  kept.edges.reserve(edges.edges.size());
  for (const auto& e : edges.edges) {
    if (rng.next_uniform() > p_drop) kept.edges.push_back(e);
  }
  return kept;
}

std::vector<SparseGraph> make_views(const EdgeList& edges, int num_nodes, int k,
                                    double p_drop, const Rng& rng) {
  if (k < 1) throw std::invalid_argument("make_views: k must be >= 1");
  std::vector<SparseGraph> views;
  views.reserve(k);
  for (int i = 0; i < k; ++i) {
    Rng view_rng = rng.substream(static_cast<std::uint64_t>(i));
    EdgeList dropped = edge_drop(edges, p_drop, view_rng);
    views.push_back(normalize_adjacency(build_graph(num_nodes, dropped)));
  }
  return views;
}

}  // namespace a3gcn
