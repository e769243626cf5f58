#pragma once

#include <vector>

#include "a3gcn/graph.hpp"
#include "a3gcn/rng.hpp"

namespace a3gcn {

/// Keeps each canonical undirected edge iff its uniform draw exceeds p_drop.
/// One draw per pair, so both directions survive or vanish together.
/// Requires 0 <= p_drop <= 1.
EdgeList edge_drop(const EdgeList& edges, double p_drop, Rng& rng);

/// k independently dropped views of the graph, each built and normalized.
/// View i draws from its own pre-assigned substream of rng, so the set of
/// views does not depend on construction order.
std::vector<SparseGraph> make_views(const EdgeList& edges, int num_nodes, int k,
                                    double p_drop, const Rng& rng);

}  // namespace a3gcn
