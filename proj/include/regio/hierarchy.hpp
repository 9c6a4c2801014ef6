#pragma once

#include <cstdint>
#include <vector>

#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace regio {

/// REDCAP-style rule for which inter-cluster distances feed a linkage: first
/// order aggregates only over original graph edges crossing the two clusters,
/// full order aggregates over all member pairs. Ward is moment-based, so the
/// order constraint does not change it.
enum class OrderConstraint { first, full };

OrderConstraint order_from_string(const std::string& s);
std::string to_string(OrderConstraint o);

struct MergeRecord {
  std::int32_t left = 0;    // cluster ids; leaves are 0..n-1
  std::int32_t right = 0;
  std::int32_t parent = 0;  // newly created cluster id (n, n+1, ...)
  double distance = 0.0;    // linkage value at the merge
};

/// Dendrogram of agglomerative merges; n-1 records for a connected graph.
struct MergeTree {
  std::int32_t n_leaves = 0;
  std::vector<MergeRecord> merges;
};

struct MergeOptions {
  Linkage linkage = Linkage::ward;
  OrderConstraint order = OrderConstraint::full;
  /// Disconnected input: false = throw, true = independent per-component trees.
  bool allow_forest = false;
  /// Record, per merge, the minimum-weight original graph edge joining the
  /// two merged clusters (the REDCAP spanning-tree construction).
  bool record_connecting_edges = false;
};

struct ConnectingEdge {
  std::int32_t u = 0;
  std::int32_t v = 0;
  double weight = 0.0;  // Euclidean feature distance between the endpoints
};

struct MergeResult {
  MergeTree tree;
  std::vector<ConnectingEdge> connecting_edges;  // one per merge when recorded
};

/// Contiguity-constrained agglomerative clustering. At every step the merged
/// pair is the minimum-linkage pair among cluster pairs joined by at least
/// one graph edge; ties break on the smallest (id, id) pair. Deterministic
/// for a fixed input.
MergeResult constrained_merge(const ContiguityGraph& graph, const FeatureMatrix& features,
                              const MergeOptions& options);

MergeTree constrained_agglomerative(const ContiguityGraph& graph, const FeatureMatrix& features,
                                    Linkage linkage = Linkage::ward);

/// Partition induced by undoing the last k-1 merges. Regions stay connected
/// for trees produced under a contiguity constraint. k must lie between the
/// component count of the tree and n.
Partition cut(const MergeTree& tree, std::int32_t k);

}  // namespace regio
