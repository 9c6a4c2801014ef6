// NEON kernel variants (2 doubles per lane), aarch64 only.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "regio/kernels.hpp"

namespace regio::kernels::detail {

namespace {

double neon_sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double neon_dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double neon_squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void neon_accumulate_sq_diff(double* acc, const double* x, double c, std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), cv);
    vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), d, d));
  }
  for (; i < n; ++i) {
    const double d = x[i] - c;
    acc[i] += d * d;
  }
}

double neon_sum_sqrt(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vsqrtq_f64(vld1q_f64(x + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::sqrt(x[i]);
  return s;
}

void neon_add_scaled(double* y, const double* x, double a, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void neon_affine(double* x, double a, double b, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  const float64x2_t bv = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vfmaq_f64(bv, av, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] = a * x[i] + b;
}

std::pair<double, double> neon_min_max(const double* x, std::size_t n) {
  double lo = x[0];
  double hi = x[0];
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t vlo = vld1q_f64(x);
    float64x2_t vhi = vlo;
    for (i = 2; i + 2 <= n; i += 2) {
      const float64x2_t v = vld1q_f64(x + i);
      vlo = vminq_f64(vlo, v);
      vhi = vmaxq_f64(vhi, v);
    }
    lo = vminvq_f64(vlo);
    hi = vmaxvq_f64(vhi);
  }
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  return {lo, hi};
}

double neon_sum_euclid(const double* const* chans, std::size_t m, const double* mu,
                       std::size_t n) {
  float64x2_t total = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t ch = 0; ch < m; ++ch) {
      const float64x2_t d = vsubq_f64(vld1q_f64(chans[ch] + i), vdupq_n_f64(mu[ch]));
      acc = vfmaq_f64(acc, d, d);
    }
    total = vaddq_f64(total, vsqrtq_f64(acc));
  }
  double s = vaddvq_f64(total);
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

std::pair<double, double> neon_sq_dist_min_max(const double* const* chans, std::size_t m,
                                               const double* q, std::size_t n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t vlo = vdupq_n_f64(lo);
    float64x2_t vhi = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t ch = 0; ch < m; ++ch) {
        const float64x2_t d = vsubq_f64(vld1q_f64(chans[ch] + i), vdupq_n_f64(q[ch]));
        acc = vfmaq_f64(acc, d, d);
      }
      vlo = vminq_f64(vlo, acc);
      vhi = vmaxq_f64(vhi, acc);
    }
    lo = vminvq_f64(vlo);
    hi = vmaxvq_f64(vhi);
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

KernelTable neon_table() {
  return {neon_sum,      neon_dot,        neon_squared_distance, neon_accumulate_sq_diff,
          neon_sum_sqrt, neon_add_scaled, neon_affine,           neon_min_max,
          neon_sum_euclid, neon_sq_dist_min_max};
}

}  // namespace regio::kernels::detail
