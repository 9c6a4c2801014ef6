#include "regio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "regio/kernels.hpp"
#include "regio/rng.hpp"

namespace regio {

double calinski_harabasz(const Partition& p, const FeatureMatrix& f) {
  const std::int32_t n = p.n();
  const std::int32_t k = p.k;
  if (k < 2) throw std::invalid_argument("calinski_harabasz: need at least 2 regions");
  const double w = within_variability(p, f);
  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  const double b = between_variability(p, f);
  return (b / (k - 1)) / (w / (n - k));
}

double silhouette(const Partition& p, const FeatureMatrix& f, std::int64_t sample_cap,
                  std::uint64_t seed) {
  const std::int32_t n = p.n();
  const std::int32_t k = p.k;
  const std::int32_t m = f.cols();
  if (k < 2) throw std::invalid_argument("silhouette: need at least 2 regions");

  // Sampled unit ids, ascending.
  std::vector<std::int32_t> sample;
  if (sample_cap > 0 && sample_cap < n) {
    std::vector<std::int32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    rng.shuffle(ids);
    sample.assign(ids.begin(), ids.begin() + sample_cap);
    std::sort(sample.begin(), sample.end());
  } else {
    sample.resize(n);
    std::iota(sample.begin(), sample.end(), 0);
  }

  // Group the sample by cluster into SoA blocks.
  struct Block {
    std::vector<double> cols;  // m channels, channel stride = size
    std::size_t size = 0;
  };
  std::vector<Block> blocks(k);
  for (const std::int32_t u : sample) ++blocks[p.labels[u]].size;
  for (auto& b : blocks) {
    b.cols.assign(b.size * m, 0.0);
    b.size = 0;  // reused as a write cursor
  }
  std::vector<std::size_t> strides(k);
  {
    std::vector<std::size_t> counts(k, 0);
    for (const std::int32_t u : sample) ++counts[p.labels[u]];
    for (std::int32_t c = 0; c < k; ++c) strides[c] = counts[c];
  }
  for (const std::int32_t u : sample) {
    Block& b = blocks[p.labels[u]];
    auto row = f.row(u);
    for (std::int32_t j = 0; j < m; ++j) b.cols[j * strides[p.labels[u]] + b.size] = row[j];
    ++b.size;
  }

  std::vector<const double*> chan_ptrs(m);
  double total = 0.0;
  for (const std::int32_t u : sample) {
    auto row = f.row(u);
    const std::int32_t own = p.labels[u];

    double a = 0.0;
    bool own_singleton = blocks[own].size <= 1;
    double b_min = std::numeric_limits<double>::infinity();
    if (!own_singleton) {
      for (std::int32_t c = 0; c < k; ++c) {
        const Block& blk = blocks[c];
        if (blk.size == 0) continue;
        for (std::int32_t j = 0; j < m; ++j) chan_ptrs[j] = blk.cols.data() + j * strides[c];
        const double sum_d = kernels::sum_euclid(chan_ptrs.data(), m, row.data(), blk.size);
        if (c == own) {
          a = sum_d / static_cast<double>(blk.size - 1);  // excludes the zero self-term
        } else {
          b_min = std::min(b_min, sum_d / static_cast<double>(blk.size));
        }
      }
    }
    double s = 0.0;
    if (!own_singleton && std::isfinite(b_min)) {
      const double denom = std::max(a, b_min);
      s = denom > 0.0 ? (b_min - a) / denom : 0.0;
    }
    total += s;
  }
  return total / static_cast<double>(sample.size());
}

double normalized_sse(const Partition& p, const FeatureMatrix& f) {
  // Sum over ordered pairs of squared differences, per region, divided by the
  // region size: identical to twice the region's squared deviation from its
  // mean.
  const std::int32_t m = f.cols();
  std::vector<RegionSummary> sums(p.k, RegionSummary(m));
  for (std::int32_t i = 0; i < p.n(); ++i) sums[p.labels[i]].add(f.row(i));
  double total = 0.0;
  for (const auto& s : sums) {
    if (s.count == 0) throw std::invalid_argument("normalized_sse: empty region");
    total += 2.0 * s.squared_deviation();
  }
  return total;
}

namespace {

BinMatrix bin_against(const FeatureMatrix& f,
                      const std::vector<std::array<double, 4>>& thresholds) {
  BinMatrix out;
  out.n = f.rows();
  out.m = f.cols();
  out.bins.assign(std::size_t(out.n) * out.m, 1);
  for (std::int32_t j = 0; j < out.m; ++j) {
    const auto& t = thresholds[j];
    for (std::int32_t i = 0; i < out.n; ++i) {
      const double v = f(i, j);
      std::int8_t bin = 1;
      for (int q = 0; q < 4; ++q) {
        if (v > t[q]) bin = static_cast<std::int8_t>(q + 2);
      }
      out.bins[std::size_t(i) * out.m + j] = bin;
    }
  }
  return out;
}

}  // namespace

BinMatrix bin_national(const FeatureMatrix& f) {
  const std::int32_t n = f.rows();
  const std::int32_t m = f.cols();
  if (n == 0) return {};
  // Threshold ranks (1-indexed, exact rational ceil): lower 70% split evenly
  // across bins 1-3, the 70th and 85th percentiles bound bins 4 and 5.
  const std::array<std::pair<std::int64_t, std::int64_t>, 4> fractions = {
      {{7, 30}, {14, 30}, {21, 30}, {17, 20}}};
  std::vector<std::array<double, 4>> thresholds(m);
  auto cols = f.columns();
  for (std::int32_t j = 0; j < m; ++j) {
    auto& col = cols[j];
    std::sort(col.begin(), col.end());
    for (int q = 0; q < 4; ++q) {
      const auto [num, den] = fractions[q];
      std::int64_t rank = (num * n + den - 1) / den;  // ceil
      rank = std::clamp<std::int64_t>(rank, 1, n);
      thresholds[j][q] = col[rank - 1];
    }
  }
  return bin_against(f, thresholds);
}

BinMatrix bin_with_thresholds(const FeatureMatrix& f,
                              const std::vector<std::array<double, 4>>& thresholds) {
  if (thresholds.size() != static_cast<std::size_t>(f.cols()))
    throw std::invalid_argument("bin_with_thresholds: need one threshold set per column");
  return bin_against(f, thresholds);
}

std::vector<double> ahr(const Partition& p, const BinMatrix& bins) {
  if (bins.n != p.n()) throw std::invalid_argument("ahr: size mismatch");
  std::vector<double> acc(p.k, 0.0);
  std::vector<std::int64_t> cnt(p.k, 0);
  for (std::int32_t i = 0; i < p.n(); ++i) {
    std::int32_t high = 0;
    for (std::int32_t j = 0; j < bins.m; ++j) {
      if (bins.at(i, j) >= 4) ++high;
    }
    acc[p.labels[i]] += high;
    ++cnt[p.labels[i]];
  }
  for (std::int32_t r = 0; r < p.k; ++r) acc[r] /= static_cast<double>(cnt[r]);
  return acc;
}

std::vector<std::int32_t> risk_rank(const std::vector<double>& ahr_values) {
  const std::int32_t k = static_cast<std::int32_t>(ahr_values.size());
  std::vector<std::int32_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (ahr_values[a] != ahr_values[b]) return ahr_values[a] < ahr_values[b];
    return a < b;
  });
  std::vector<std::int32_t> rank(k);
  for (std::int32_t i = 0; i < k; ++i) rank[order[i]] = i + 1;
  return rank;
}

MetricsReport compute_metrics(const Partition& p, const FeatureMatrix& f,
                              const MetricsOptions& options) {
  MetricsReport r;
  r.within = within_variability(p, f);
  r.between = between_variability(p, f);
  if (p.k >= 2) {
    r.chi = r.within > 0.0
                ? (r.between / (p.k - 1)) / (r.within / (p.n() - p.k))
                : std::numeric_limits<double>::infinity();
    r.silhouette = silhouette(p, f, options.silhouette_cap, options.seed);
  } else {
    r.chi = std::numeric_limits<double>::quiet_NaN();
    r.silhouette = std::numeric_limits<double>::quiet_NaN();
  }
  r.sse_normalized = normalized_sse(p, f);
  const BinMatrix bins = bin_national(f);
  r.ahr_per_region = ahr(p, bins);
  r.region_risk_rank = risk_rank(r.ahr_per_region);
  return r;
}

}  // namespace regio
