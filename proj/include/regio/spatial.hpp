#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "regio/geom.hpp"
#include "regio/objective.hpp"

namespace regio {

/// One tessellation cell: polygon, centroid, and its feature vector.
struct SpatialUnit {
  std::int32_t id = 0;
  Point centroid;
  std::vector<Point> polygon;    // closed ring, not repeating the first vertex
  std::vector<double> features;  // length m, shared across the dataset
};

/// Undirected adjacency over unit ids. Immutable after construction;
/// neighbor lists are sorted, duplicate-free, and loop-free.
class ContiguityGraph {
 public:
  ContiguityGraph() = default;

  /// Build from undirected edges; both orientations are derived, duplicates
  /// and self-loops rejected.
  static ContiguityGraph from_edges(std::int32_t n,
                                    std::span<const std::pair<std::int32_t, std::int32_t>> edges);

  std::int32_t size() const { return n_; }
  std::int64_t edge_count() const { return static_cast<std::int64_t>(flat_.size()) / 2; }

  std::span<const std::int32_t> neighbors(std::int32_t i) const {
    return {flat_.data() + offsets_[i], flat_.data() + offsets_[i + 1]};
  }

  std::int32_t degree(std::int32_t i) const {
    return static_cast<std::int32_t>(offsets_[i + 1] - offsets_[i]);
  }

  bool adjacent(std::int32_t i, std::int32_t j) const;

  /// Unique undirected edges (i < j), sorted.
  std::vector<std::pair<std::int32_t, std::int32_t>> edges() const;

 private:
  std::int32_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::int32_t> flat_;
};

/// Queen contiguity: edge iff the two polygons share at least one boundary
/// point (a segment or a single vertex) within the snap tolerance.
ContiguityGraph build_queen_contiguity(std::span<const SpatialUnit> units);

/// Rook contiguity: edge iff the shared boundary has positive length.
ContiguityGraph build_rook_contiguity(std::span<const SpatialUnit> units);

/// Voronoi-cell adjacency of the unit centroids, computed as Delaunay
/// neighbor pairs. `max_bridge_distance`, when set, drops links longer than
/// the given centroid distance.
ContiguityGraph bridge_gaps(std::span<const SpatialUnit> units,
                            std::optional<double> max_bridge_distance = std::nullopt);

/// True iff `members` induces a connected subgraph. Throws on an empty set.
bool is_region_connected(const ContiguityGraph& g, std::span<const std::int32_t> members);

/// Labels every unit with its connected-component id (components numbered by
/// smallest contained unit id).
Partition connected_components(const ContiguityGraph& g);

/// Checks that every region of `p` is connected in `g`.
bool all_regions_connected(const ContiguityGraph& g, const Partition& p);

/// Validates units: dense unique ids from 0, consistent feature length,
/// simple polygons with positive area. Throws std::invalid_argument naming
/// the offending unit.
void validate_units(std::span<const SpatialUnit> units);

/// Feature matrix view of the units (row i = features of unit id i).
FeatureMatrix feature_matrix(std::span<const SpatialUnit> units);

}  // namespace regio
