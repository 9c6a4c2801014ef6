#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace regio {

/// Per-unit region labels; regions 0..k-1, every region nonempty.
struct Partition {
  std::vector<std::int32_t> labels;
  std::int32_t k = 0;

  std::int32_t n() const { return static_cast<std::int32_t>(labels.size()); }

  /// Member ids per region, ascending within each region.
  std::vector<std::vector<std::int32_t>> regions() const;

  /// Relabel regions by order of first appearance (unit 0's region becomes 0,
  /// and so on). Canonical form used by every algorithm for determinism.
  void canonicalize();
};

/// Row-major n x m feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::int32_t n, std::int32_t m) : n_(n), m_(m), data_(std::size_t(n) * m, 0.0) {}
  FeatureMatrix(std::int32_t n, std::int32_t m, std::vector<double> data);

  std::int32_t rows() const { return n_; }
  std::int32_t cols() const { return m_; }

  std::span<const double> row(std::int32_t i) const {
    return {data_.data() + std::size_t(i) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<double> row(std::int32_t i) {
    return {data_.data() + std::size_t(i) * m_, static_cast<std::size_t>(m_)};
  }
  double operator()(std::int32_t i, std::int32_t j) const { return data_[std::size_t(i) * m_ + j]; }
  double& operator()(std::int32_t i, std::int32_t j) { return data_[std::size_t(i) * m_ + j]; }

  const std::vector<double>& data() const { return data_; }

  /// Column-major copy (one contiguous array per feature channel), the layout
  /// the batch kernels consume.
  std::vector<std::vector<double>> columns() const;

 private:
  std::int32_t n_ = 0;
  std::int32_t m_ = 0;
  std::vector<double> data_;
};

/// Running per-region moments: count, per-dimension sum, and total sum of
/// squared norms. Supports O(m) mean and squared-deviation queries.
struct RegionSummary {
  std::int64_t count = 0;
  std::vector<double> sum;   // length m
  double sum_sq = 0.0;       // sum over members of ||x||^2

  explicit RegionSummary(std::int32_t m) : sum(m, 0.0) {}

  void add(std::span<const double> x);
  void remove(std::span<const double> x);
  void merge(const RegionSummary& other);

  std::vector<double> mean() const;
  /// Sum over members of ||x - mean||^2 (computed from the moments).
  double squared_deviation() const;
};

/// Euclidean distance between two equal-length vectors.
double feature_distance(std::span<const double> u, std::span<const double> v);

/// W objective: sum over regions of member distances to the region mean.
double within_variability(const Partition& p, const FeatureMatrix& f);

/// B objective: count-weighted sum of region-mean distances to the global mean.
double between_variability(const Partition& p, const FeatureMatrix& f);

enum class Linkage { ward, complete, average, single };

Linkage linkage_from_string(const std::string& s);
std::string to_string(Linkage l);

/// Direct evaluation of the linkage distance between two disjoint member sets.
/// Ward is the merge cost in squared norms; the others aggregate pairwise
/// Euclidean distances. Throws if the sets are empty or overlap.
double linkage_distance(Linkage kind, std::span<const std::int32_t> a,
                        std::span<const std::int32_t> b, const FeatureMatrix& f);

/// Min-max scale each column to [0,1]; constant columns map to 0.
FeatureMatrix minmax_normalize(const FeatureMatrix& f);

}  // namespace regio
