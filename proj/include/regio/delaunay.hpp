#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "regio/geom.hpp"

namespace regio {

/// Delaunay triangulation of a planar point set.
struct Triangulation {
  std::vector<Point> points;                             // input order
  std::vector<std::array<std::int32_t, 3>> triangles;    // CCW vertex triples

  /// Undirected edge list, each pair (i, j) with i < j, sorted, deduplicated.
  std::vector<std::pair<std::int32_t, std::int32_t>> unique_edges() const;
};

/// Incremental Bowyer-Watson triangulation.
///
/// Points are inserted in lexicographic (x, y) order and near-zero in-circle
/// determinants are resolved in favour of the existing triangulation, so
/// cocircular degeneracies (e.g. four points on a square) break
/// deterministically by lexicographic point order.
///
/// Throws std::invalid_argument for fewer than 3 points, duplicate points,
/// or an all-collinear input.
Triangulation delaunay_triangulate(std::span<const Point> pts);

}  // namespace regio
