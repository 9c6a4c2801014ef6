#include "regio/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "regio/kernels.hpp"

namespace regio {

std::vector<std::vector<std::int32_t>> Partition::regions() const {
  std::vector<std::vector<std::int32_t>> out(k);
  for (std::int32_t i = 0; i < n(); ++i) {
    const std::int32_t r = labels[i];
    if (r < 0 || r >= k) throw std::invalid_argument("partition: label out of range");
    out[r].push_back(i);
  }
  for (const auto& members : out) {
    if (members.empty()) throw std::invalid_argument("partition: empty region");
  }
  return out;
}

void Partition::canonicalize() {
  std::vector<std::int32_t> remap(k, -1);
  std::int32_t next = 0;
  for (auto& l : labels) {
    if (remap[l] == -1) remap[l] = next++;
    l = remap[l];
  }
  k = next;
}

FeatureMatrix::FeatureMatrix(std::int32_t n, std::int32_t m, std::vector<double> data)
    : n_(n), m_(m), data_(std::move(data)) {
  if (data_.size() != std::size_t(n) * m) throw std::invalid_argument("feature matrix size mismatch");
  for (const double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature matrix: non-finite value");
  }
}

std::vector<std::vector<double>> FeatureMatrix::columns() const {
  std::vector<std::vector<double>> cols(m_, std::vector<double>(n_));
  for (std::int32_t i = 0; i < n_; ++i) {
    const double* r = data_.data() + std::size_t(i) * m_;
    for (std::int32_t j = 0; j < m_; ++j) cols[j][i] = r[j];
  }
  return cols;
}

void RegionSummary::add(std::span<const double> x) {
  ++count;
  for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += x[j];
  sum_sq += kernels::dot(x.data(), x.data(), x.size());
}

void RegionSummary::remove(std::span<const double> x) {
  --count;
  for (std::size_t j = 0; j < sum.size(); ++j) sum[j] -= x[j];
  sum_sq -= kernels::dot(x.data(), x.data(), x.size());
}

void RegionSummary::merge(const RegionSummary& other) {
  count += other.count;
  for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += other.sum[j];
  sum_sq += other.sum_sq;
}

std::vector<double> RegionSummary::mean() const {
  std::vector<double> mu(sum.size());
  for (std::size_t j = 0; j < sum.size(); ++j) mu[j] = sum[j] / static_cast<double>(count);
  return mu;
}

double RegionSummary::squared_deviation() const {
  double norm_sq = 0.0;
  for (const double s : sum) norm_sq += s * s;
  const double d = sum_sq - norm_sq / static_cast<double>(count);
  return d > 0.0 ? d : 0.0;
}

double feature_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("feature_distance: length mismatch");
  return std::sqrt(kernels::squared_distance(u.data(), v.data(), u.size()));
}

namespace {

std::vector<std::vector<double>> region_means(const Partition& p, const FeatureMatrix& f) {
  const std::int32_t m = f.cols();
  std::vector<std::vector<double>> mu(p.k, std::vector<double>(m, 0.0));
  std::vector<std::int64_t> cnt(p.k, 0);
  for (std::int32_t i = 0; i < p.n(); ++i) {
    const std::int32_t r = p.labels[i];
    if (r < 0 || r >= p.k) throw std::invalid_argument("partition: label out of range");
    auto row = f.row(i);
    for (std::int32_t j = 0; j < m; ++j) mu[r][j] += row[j];
    ++cnt[r];
  }
  for (std::int32_t r = 0; r < p.k; ++r) {
    if (cnt[r] == 0) throw std::invalid_argument("partition: empty region");
    for (std::int32_t j = 0; j < m; ++j) mu[r][j] /= static_cast<double>(cnt[r]);
  }
  return mu;
}

}  // namespace

double within_variability(const Partition& p, const FeatureMatrix& f) {
  if (p.n() != f.rows()) throw std::invalid_argument("within_variability: size mismatch");
  const auto mu = region_means(p, f);
  double w = 0.0;
  for (std::int32_t i = 0; i < p.n(); ++i) {
    auto row = f.row(i);
    const auto& c = mu[p.labels[i]];
    w += std::sqrt(kernels::squared_distance(row.data(), c.data(), row.size()));
  }
  return w;
}

double between_variability(const Partition& p, const FeatureMatrix& f) {
  if (p.n() != f.rows()) throw std::invalid_argument("between_variability: size mismatch");
  const std::int32_t m = f.cols();
  const auto mu = region_means(p, f);
  std::vector<double> global(m, 0.0);
  for (std::int32_t i = 0; i < p.n(); ++i) {
    auto row = f.row(i);
    for (std::int32_t j = 0; j < m; ++j) global[j] += row[j];
  }
  for (std::int32_t j = 0; j < m; ++j) global[j] /= static_cast<double>(p.n());

  std::vector<std::int64_t> cnt(p.k, 0);
  for (const auto l : p.labels) ++cnt[l];
  double b = 0.0;
  for (std::int32_t r = 0; r < p.k; ++r) {
    b += static_cast<double>(cnt[r]) *
         std::sqrt(kernels::squared_distance(mu[r].data(), global.data(), m));
  }
  return b;
}

Linkage linkage_from_string(const std::string& s) {
  if (s == "ward") return Linkage::ward;
  if (s == "complete") return Linkage::complete;
  if (s == "average") return Linkage::average;
  if (s == "single") return Linkage::single;
  throw std::invalid_argument("unknown linkage: " + s);
}

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::ward: return "ward";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::single: return "single";
  }
  return "?";
}

double linkage_distance(Linkage kind, std::span<const std::int32_t> a,
                        std::span<const std::int32_t> b, const FeatureMatrix& f) {
  if (a.empty() || b.empty()) throw std::invalid_argument("linkage_distance: empty region");
  {
    std::unordered_set<std::int32_t> seen(a.begin(), a.end());
    for (const auto i : b) {
      if (seen.count(i)) throw std::invalid_argument("linkage_distance: overlapping regions");
    }
  }
  const std::int32_t m = f.cols();
  if (kind == Linkage::ward) {
    RegionSummary sa(m), sb(m);
    for (const auto i : a) sa.add(f.row(i));
    for (const auto i : b) sb.add(f.row(i));
    const auto ma = sa.mean();
    const auto mb = sb.mean();
    const double na = static_cast<double>(sa.count);
    const double nb = static_cast<double>(sb.count);
    return na * nb / (na + nb) * kernels::squared_distance(ma.data(), mb.data(), m);
  }
  double best_min = std::numeric_limits<double>::infinity();
  double best_max = 0.0;
  double total = 0.0;
  for (const auto i : a) {
    auto ri = f.row(i);
    for (const auto j : b) {
      auto rj = f.row(j);
      const double d = std::sqrt(kernels::squared_distance(ri.data(), rj.data(), m));
      best_min = std::min(best_min, d);
      best_max = std::max(best_max, d);
      total += d;
    }
  }
  switch (kind) {
    case Linkage::complete: return best_max;
    case Linkage::average: return total / (static_cast<double>(a.size()) * b.size());
    case Linkage::single: return best_min;
    default: return 0.0;  // unreachable
  }
}

FeatureMatrix minmax_normalize(const FeatureMatrix& f) {
  const std::int32_t n = f.rows();
  const std::int32_t m = f.cols();
  auto cols = f.columns();
  FeatureMatrix out(n, m);
  for (std::int32_t j = 0; j < m; ++j) {
    auto& col = cols[j];
    const auto [lo, hi] = kernels::min_max(col.data(), n);
    if (hi > lo) {
      const double scale = 1.0 / (hi - lo);
      kernels::affine(col.data(), scale, -lo * scale, n);
      // Guard against one-ulp overshoot at the column extremes.
      for (std::int32_t i = 0; i < n; ++i) col[i] = std::clamp(col[i], 0.0, 1.0);
    } else {
      std::fill(col.begin(), col.end(), 0.0);
    }
    for (std::int32_t i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out;
}

}  // namespace regio
