#pragma once

#include <cstddef>
#include <string>
#include <utility>

namespace regio::kernels {

/// Data-parallel inner loops shared by the clustering objectives, the metric
/// suite, and the field generator. A scalar reference implementation always
/// exists; on x86-64 an AVX2 variant (on aarch64 a NEON variant) is selected
/// at runtime when the CPU supports it. The variants are equivalence-tested
/// against the scalar kernels; results may differ by summation order only.
///
/// Selection can be overridden with the REGIO_KERNELS environment variable
/// (`scalar`, `avx2`, `neon`, `auto`) or with force_backend().

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  // sum of x[0..n)
  double (*sum)(const double* x, std::size_t n);
  // dot product
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum of (a[i]-b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // acc[i] += (x[i]-c)^2
  void (*accumulate_sq_diff)(double* acc, const double* x, double c, std::size_t n);
  // sum of sqrt(x[i]); x[i] >= 0
  double (*sum_sqrt)(const double* x, std::size_t n);
  // y[i] += a * x[i]
  void (*add_scaled)(double* y, const double* x, double a, std::size_t n);
  // x[i] = a * x[i] + b
  void (*affine)(double* x, double a, double b, std::size_t n);
  // (min, max) over x[0..n), n >= 1
  std::pair<double, double> (*min_max)(const double* x, std::size_t n);
  // sum over i of sqrt(sum over ch of (chans[ch][i] - mu[ch])^2)
  double (*sum_euclid)(const double* const* chans, std::size_t m, const double* mu,
                       std::size_t n);
  // (min, max) over i of sum over ch of (chans[ch][i] - q[ch])^2; n >= 1
  std::pair<double, double> (*sq_dist_min_max)(const double* const* chans, std::size_t m,
                                               const double* q, std::size_t n);
};

/// Active kernel table (dispatch resolved on first use).
const KernelTable& table();

Backend active_backend();
std::string backend_name();

/// Force a specific backend; throws std::runtime_error if unavailable.
void force_backend(Backend b);

// Convenience forwarders.
inline double sum(const double* x, std::size_t n) { return table().sum(x, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
inline double squared_distance(const double* a, const double* b, std::size_t n) {
  return table().squared_distance(a, b, n);
}
inline void accumulate_sq_diff(double* acc, const double* x, double c, std::size_t n) {
  table().accumulate_sq_diff(acc, x, c, n);
}
inline double sum_sqrt(const double* x, std::size_t n) { return table().sum_sqrt(x, n); }
inline void add_scaled(double* y, const double* x, double a, std::size_t n) {
  table().add_scaled(y, x, a, n);
}
inline void affine(double* x, double a, double b, std::size_t n) { table().affine(x, a, b, n); }
inline std::pair<double, double> min_max(const double* x, std::size_t n) {
  return table().min_max(x, n);
}
inline double sum_euclid(const double* const* chans, std::size_t m, const double* mu,
                         std::size_t n) {
  return table().sum_euclid(chans, m, mu, n);
}
inline std::pair<double, double> sq_dist_min_max(const double* const* chans, std::size_t m,
                                                 const double* q, std::size_t n) {
  return table().sq_dist_min_max(chans, m, q, n);
}

namespace detail {
KernelTable scalar_table();
#if defined(REGIO_BUILD_AVX2)
KernelTable avx2_table();
#endif
#if defined(REGIO_BUILD_NEON)
KernelTable neon_table();
#endif
}  // namespace detail

}  // namespace regio::kernels
