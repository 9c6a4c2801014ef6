#pragma once

#include <cstdint>
#include <vector>

#include "regio/hierarchy.hpp"
#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace regio {

/// Spanning tree over unit ids with per-edge feature-distance weights.
struct SpanningTree {
  std::int32_t n = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // n-1 for connected input
  std::vector<double> weights;

  double total_weight() const;
};

/// Minimum spanning tree of the contiguity graph under Euclidean feature
/// distances (Kruskal). Ties break on (weight, smaller id pair). Throws for
/// a disconnected graph, naming units from two separate components.
SpanningTree build_mst(const ContiguityGraph& graph, const FeatureMatrix& features);

/// REDCAP spanning tree: contiguity-constrained agglomeration under the given
/// linkage and order constraint; each merge records the minimum-weight graph
/// edge joining the merged clusters.
SpanningTree redcap_tree(const ContiguityGraph& graph, const FeatureMatrix& features,
                         Linkage linkage, OrderConstraint order);

/// Iterative best-cut partitioning of a spanning tree: k-1 cuts, each
/// removing the tree edge whose removal maximally decreases the total
/// within-region variability (W). Ties break on the lexicographically
/// smallest edge.
Partition tree_partition(const SpanningTree& tree, const FeatureMatrix& features, std::int32_t k);

/// SKATER: MST followed by iterative best-cut partitioning.
Partition skater(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t k);

/// REDCAP: redcap_tree followed by the same best-cut loop as SKATER.
Partition redcap(const ContiguityGraph& graph, const FeatureMatrix& features, std::int32_t k,
                 Linkage linkage, OrderConstraint order);

}  // namespace regio
