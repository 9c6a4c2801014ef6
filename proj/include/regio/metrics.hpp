#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "regio/objective.hpp"

namespace regio {

/// Per-unit, per-domain risk bins 1..5.
struct BinMatrix {
  std::int32_t n = 0;
  std::int32_t m = 0;
  std::vector<std::int8_t> bins;  // row-major

  std::int8_t at(std::int32_t i, std::int32_t j) const { return bins[std::size_t(i) * m + j]; }
};

/// Calinski-Harabasz index [B/(k-1)] / [W/(n-k)] with the W and B of the
/// regionalization objective. Returns +infinity when W is zero; throws for
/// k < 2.
double calinski_harabasz(const Partition& p, const FeatureMatrix& f);

/// Mean silhouette coefficient. With 0 < sample_cap < n the score is
/// computed over a seeded uniform sample (distances within the sample);
/// sample_cap <= 0 or >= n is exhaustive. Points in singleton clusters
/// score 0. Throws for k < 2.
double silhouette(const Partition& p, const FeatureMatrix& f, std::int64_t sample_cap = 0,
                  std::uint64_t seed = 0);

/// Normalized SSE: per region, the sum of squared differences over ordered
/// member pairs divided by the region size, summed over regions.
double normalized_sse(const Partition& p, const FeatureMatrix& f);

/// Quantile risk bins per column: bins 4-5 jointly cover the top 30%
/// (thresholds at the 70th and 85th percentiles); bins 1-3 split the lower
/// 70% evenly. Values tied with a threshold land in the lower bin; constant
/// columns are all bin 1.
BinMatrix bin_national(const FeatureMatrix& f);

/// Binning against externally supplied per-column thresholds (four ascending
/// cut points per column).
BinMatrix bin_with_thresholds(const FeatureMatrix& f,
                              const std::vector<std::array<double, 4>>& thresholds);

/// Average number of high-risk domains (bins >= 4) per unit, per region.
std::vector<double> ahr(const Partition& p, const BinMatrix& bins);

/// Ranks 1..k ascending by AHR (1 = lowest risk); ties break on region id.
std::vector<std::int32_t> risk_rank(const std::vector<double>& ahr_values);

struct MetricsReport {
  double chi = 0.0;
  double silhouette = 0.0;
  double sse_normalized = 0.0;
  double within = 0.0;
  double between = 0.0;
  std::vector<double> ahr_per_region;
  std::vector<std::int32_t> region_risk_rank;
};

struct MetricsOptions {
  std::int64_t silhouette_cap = 10000;
  std::uint64_t seed = 0;
};

MetricsReport compute_metrics(const Partition& p, const FeatureMatrix& f,
                              const MetricsOptions& options = {});

}  // namespace regio
