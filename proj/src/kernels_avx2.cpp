// AVX2 kernel variants (4 doubles per lane). Compiled with -mavx2 -mfma and
// selected at runtime; see kernels.cpp for dispatch.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "regio/kernels.hpp"

namespace regio::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double avx2_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double avx2_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double avx2_squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void avx2_accumulate_sq_diff(double* acc, const double* x, double c, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), cv);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) {
    const double d = x[i] - c;
    acc[i] += d * d;
  }
}

double avx2_sum_sqrt(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_loadu_pd(x + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::sqrt(x[i]);
  return s;
}

void avx2_add_scaled(double* y, const double* x, double a, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void avx2_affine(double* x, double a, double b, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const __m256d bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), bv));
  for (; i < n; ++i) x[i] = a * x[i] + b;
}

std::pair<double, double> avx2_min_max(const double* x, std::size_t n) {
  double lo = x[0];
  double hi = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vlo = _mm256_loadu_pd(x);
    __m256d vhi = vlo;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(x + i);
      vlo = _mm256_min_pd(vlo, v);
      vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, vlo);
    lo = tmp[0];
    for (int j = 1; j < 4; ++j)
      if (tmp[j] < lo) lo = tmp[j];
    _mm256_store_pd(tmp, vhi);
    hi = tmp[0];
    for (int j = 1; j < 4; ++j)
      if (tmp[j] > hi) hi = tmp[j];
  }
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  return {lo, hi};
}

double avx2_sum_euclid(const double* const* chans, std::size_t m, const double* mu,
                       std::size_t n) {
  __m256d total = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t ch = 0; ch < m; ++ch) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(chans[ch] + i), _mm256_set1_pd(mu[ch]));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    total = _mm256_add_pd(total, _mm256_sqrt_pd(acc));
  }
  double s = hsum(total);
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < m; ++ch) {
      const double d = chans[ch][i] - mu[ch];
      acc += d * d;
    }
    s += std::sqrt(acc);
  }
  return s;
}

std::pair<double, double> avx2_sq_dist_min_max(const double* const* chans, std::size_t m,
                                               const double* q, std::size_t n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vlo = _mm256_set1_pd(lo);
    __m256d vhi = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t ch = 0; ch < m; ++ch) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(chans[ch] + i), _mm256_set1_pd(q[ch]));
        acc = _mm256_fmadd_pd(d, d, acc);
      }
      vlo = _mm256_min_pd(vlo, acc);
      vhi = _mm256_max_pd(vhi, acc);
    }
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, vlo);
    for (int j = 0; j < 4; ++j) lo = std::min(lo, tmp[j]);
    _mm256_store_pd(tmp, vhi);
    for (int j = 0; j < 4; ++j) hi = std::max(hi, tmp[j]);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < m; ++ch) {
      const double d = chans[ch][i] - q[ch];
      acc += d * d;
    }
    if (acc < lo) lo = acc;
    if (acc > hi) hi = acc;
  }
  return {lo, hi};
}

}  // namespace

KernelTable avx2_table() {
  return {avx2_sum,      avx2_dot,        avx2_squared_distance, avx2_accumulate_sq_diff,
          avx2_sum_sqrt, avx2_add_scaled, avx2_affine,           avx2_min_max,
          avx2_sum_euclid, avx2_sq_dist_min_max};
}

}  // namespace regio::kernels::detail
