#pragma once

#include <cstdint>
#include <vector>

#include "regio/spatial.hpp"

namespace regio {

/// One synthetic level: a hexagon-tessellated blob of ~8000 * 2^level cells
/// carrying spatially autocorrelated feature fields.
struct LevelSpec {
  std::int32_t level = 0;
  std::int64_t target_n = 0;      // 0 = 8000 * 2^level
  double hex_diameter = 1.0;      // flat-to-flat spacing between centers
  double hole_fraction = 0.0;     // fraction of cells removed as contiguous blobs
  std::uint64_t seed = 0;
  std::int32_t channels = 5;
  double smooth_radius = 8.0;     // noise-smoothing kernel radius, in cells
  /// Emit 5 feature-distinct contiguous blobs instead of free-form fields
  /// (the planted configuration used by metric sanity checks).
  bool planted = false;

  std::int64_t resolved_target() const {
    return target_n > 0 ? target_n : (std::int64_t(8000) << level);
  }
};

/// Deterministic generation: identical specs produce bit-identical units.
/// Generated fields must clear a Moran's I > 0.5 spatial-autocorrelation bar
/// on the queen graph; failing draws are regenerated with a sub-seed (error
/// after 10 attempts). The surviving cells always form one queen-connected
/// component.
std::vector<SpatialUnit> generate_level(const LevelSpec& spec);

/// Moran's I of one value field over a contiguity graph; NaN for a
/// zero-variance field.
double moran_i(std::span<const double> values, const ContiguityGraph& graph);

/// Per-channel Moran's I of the units' features.
std::vector<double> feature_field_moran(std::span<const SpatialUnit> units,
                                        const ContiguityGraph& graph);

/// The blob assignment a planted-mode level was generated with, recomputed
/// from the unit centroids (5 contiguous sector blobs).
Partition planted_partition(std::span<const SpatialUnit> units);

/// `level_{L}_seed_{S}.geojson`, the on-disk naming convention.
std::string level_filename(std::int32_t level, std::uint64_t seed);

}  // namespace regio
