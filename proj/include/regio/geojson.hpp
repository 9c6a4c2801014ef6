#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regio/spatial.hpp"

namespace regio {

/// Reads a FeatureCollection of Polygon features with integer `id` and
/// numeric `f0..f{m-1}` properties. Ids must be dense from 0; the feature
/// dimension is inferred from the first feature. Centroids are derived from
/// the polygons. Throws std::runtime_error on malformed input.
std::vector<SpatialUnit> read_units_geojson(const std::string& path);

/// Writes units in the format read_units_geojson consumes.
void write_units_geojson(const std::string& path, std::span<const SpatialUnit> units);

/// Writes units with `region` (and optional `risk_rank`) properties added.
void write_regions_geojson(const std::string& path, std::span<const SpatialUnit> units,
                           const Partition& partition,
                           std::span<const std::int32_t> risk_rank = {});

/// Reads the per-unit `region` property from a file written by
/// write_regions_geojson; result is aligned by unit id.
Partition read_regions_geojson(const std::string& path);

/// Plain text edge list, one `i j` line per undirected edge, i < j, sorted.
void write_edge_list(const std::string& path, const ContiguityGraph& g);

/// Writes one MultiPolygon feature per ring set (used for dissolved region
/// shapes and hulls).
void write_shapes_geojson(const std::string& path,
                          const std::vector<std::vector<std::vector<Point>>>& shapes);

}  // namespace regio
