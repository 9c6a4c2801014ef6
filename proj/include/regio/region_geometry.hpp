#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regio/geom.hpp"
#include "regio/objective.hpp"
#include "regio/spatial.hpp"

namespace regio {

/// Dissolved outline of a set of tessellation cells: boundary rings after
/// shared internal edges cancel, total area, and total boundary length
/// (hole boundaries included in the perimeter).
struct RegionShape {
  std::vector<std::vector<Point>> rings;
  double area = 0.0;
  double perimeter = 0.0;
};

RegionShape dissolve(std::span<const SpatialUnit> units, std::span<const std::int32_t> members);

/// Alpha shape: union of Delaunay triangles with circumradius <= 1/alpha.
/// Outer rings only (counterclockwise); area and perimeter are summed over
/// rings. alpha <= 0 keeps every triangle (the convex-hull limit). Throws
/// when no triangle passes the radius filter or the input is degenerate.
struct AlphaShape {
  std::vector<std::vector<Point>> rings;
  double area = 0.0;
  double perimeter = 0.0;
};

AlphaShape concave_hull(std::span<const Point> pts, double alpha);

/// 1 / (2 * median nearest-neighbor spacing) — the default alpha for a
/// region's centroid cloud.
double default_alpha(std::span<const Point> pts);

/// 4*pi*area/perimeter^2; 1 for a disk. Throws on nonpositive area/perimeter.
double polsby_popper(const RegionShape& shape);

/// area / area(convex hull of the ring vertices); 1 for convex shapes.
double convex_hull_ratio(const RegionShape& shape);

/// Mean pairwise overlap fraction between per-region concave hulls fitted to
/// member centroids (Eq.-style ordered pairs, self terms removed):
///   PO = 1/(k^2-k) * sum_{i != j} area(h_i ∩ h_j) / area(h_i).
/// Intersections use a deterministic shared raster grid of `grid_res`^2
/// cells, which makes the self-overlap exactly 1 and disjoint overlap
/// exactly 0. alpha <= 0 selects the per-region default. Throws when a
/// region's hull is degenerate, naming the region.
double percent_overlap(const Partition& p, std::span<const SpatialUnit> units, double alpha = 0.0,
                       std::int32_t grid_res = 1024);

/// Per-region compactness plus the pairwise overlap score.
struct GeoMetricsReport {
  std::vector<double> polsby_popper_per_region;
  std::vector<double> convex_hull_ratio_per_region;
  double percent_overlap = 0.0;
};

GeoMetricsReport geographic_metrics(const Partition& p, std::span<const SpatialUnit> units,
                                    double alpha = 0.0, std::int32_t grid_res = 1024);

}  // namespace regio
