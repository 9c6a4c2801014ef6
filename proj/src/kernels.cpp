#include "regio/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace regio::kernels {

namespace {

double scalar_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double scalar_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double scalar_squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void scalar_accumulate_sq_diff(double* acc, const double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    acc[i] += d * d;
  }
}

double scalar_sum_sqrt(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::sqrt(x[i]);
  return s;
}

void scalar_add_scaled(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scalar_affine(double* x, double a, double b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = a * x[i] + b;
}

std::pair<double, double> scalar_min_max(const double* x, std::size_t n) {
  double lo = x[0];
  double hi = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  return {lo, hi};
}

double scalar_sum_euclid(const double* const* chans, std::size_t m, const double* mu,
                         std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < m; ++ch) {
      const double d = chans[ch][i] - mu[ch];
      acc += d * d;
    }
    s += std::sqrt(acc);
  }
  return s;
}

std::pair<double, double> scalar_sq_dist_min_max(const double* const* chans, std::size_t m,
                                                 const double* q, std::size_t n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
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

struct Dispatch {
  KernelTable tab;
  Backend backend;
};

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
#if defined(REGIO_BUILD_AVX2)
    case Backend::avx2:
      return __builtin_cpu_supports("avx2") != 0;
#endif
#if defined(REGIO_BUILD_NEON)
    case Backend::neon:
      return true;
#endif
    default:
      return false;
  }
}

Dispatch make_dispatch(Backend b) {
  switch (b) {
#if defined(REGIO_BUILD_AVX2)
    case Backend::avx2:
      return {detail::avx2_table(), Backend::avx2};
#endif
#if defined(REGIO_BUILD_NEON)
    case Backend::neon:
      return {detail::neon_table(), Backend::neon};
#endif
    default:
      return {detail::scalar_table(), Backend::scalar};
  }
}

Backend pick_default() {
  if (const char* env = std::getenv("REGIO_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
    if (v == "neon" && backend_available(Backend::neon)) return Backend::neon;
    // "auto" or unknown value falls through to detection
  }
#if defined(REGIO_BUILD_AVX2)
  if (backend_available(Backend::avx2)) return Backend::avx2;
#endif
#if defined(REGIO_BUILD_NEON)
  if (backend_available(Backend::neon)) return Backend::neon;
#endif
  return Backend::scalar;
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(pick_default());
  return d;
}

}  // namespace

namespace detail {
KernelTable scalar_table() {
  return {scalar_sum,      scalar_dot,        scalar_squared_distance, scalar_accumulate_sq_diff,
          scalar_sum_sqrt, scalar_add_scaled, scalar_affine,           scalar_min_max,
          scalar_sum_euclid, scalar_sq_dist_min_max};
}
}  // namespace detail

const KernelTable& table() { return dispatch().tab; }

Backend active_backend() { return dispatch().backend; }

std::string backend_name() {
  switch (active_backend()) {
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
    default:
      return "scalar";
  }
}

void force_backend(Backend b) {
  if (!backend_available(b)) throw std::runtime_error("kernel backend not available on this CPU");
  dispatch() = make_dispatch(b);
}

}  // namespace regio::kernels
