#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "regio/kernels.hpp"
#include "regio/rng.hpp"

using namespace regio;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.next_double();
  return v;
}

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace

TEST_CASE("scalar kernels: basic values") {
  const kernels::KernelTable t = kernels::detail::scalar_table();
  const std::vector<double> x = {1.0, 4.0, 9.0, 16.0, 25.0};
  CHECK(t.sum(x.data(), x.size()) == doctest::Approx(55.0));
  CHECK(t.sum_sqrt(x.data(), x.size()) == doctest::Approx(1 + 2 + 3 + 4 + 5));
  const auto [lo, hi] = t.min_max(x.data(), x.size());
  CHECK(lo == 1.0);
  CHECK(hi == 25.0);

  const std::vector<double> a = {3.0, 0.0};
  const std::vector<double> b = {0.0, 4.0};
  CHECK(t.squared_distance(a.data(), b.data(), 2) == doctest::Approx(25.0));
  CHECK(t.dot(a.data(), b.data(), 2) == doctest::Approx(0.0));

  std::vector<double> y = {1.0, 1.0};
  t.add_scaled(y.data(), a.data(), 2.0, 2);
  CHECK(y[0] == doctest::Approx(7.0));
  CHECK(y[1] == doctest::Approx(1.0));
  t.affine(y.data(), 0.5, 1.0, 2);
  CHECK(y[0] == doctest::Approx(4.5));
}

TEST_CASE("simd variants match the scalar reference") {
  const auto active = kernels::active_backend();
  const kernels::KernelTable scalar = kernels::detail::scalar_table();
  const kernels::KernelTable& simd = kernels::table();
  INFO("active backend: ", kernels::backend_name());

  Rng rng(42);
  for (const std::size_t n : {std::size_t(0), std::size_t(1), std::size_t(2), std::size_t(3),
                              std::size_t(4), std::size_t(5), std::size_t(7), std::size_t(8),
                              std::size_t(13), std::size_t(64), std::size_t(1000),
                              std::size_t(10001)}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    CHECK(close(simd.sum(a.data(), n), scalar.sum(a.data(), n)));
    CHECK(close(simd.dot(a.data(), b.data(), n), scalar.dot(a.data(), b.data(), n)));
    CHECK(close(simd.squared_distance(a.data(), b.data(), n),
                scalar.squared_distance(a.data(), b.data(), n)));

    auto sq = a;
    for (auto& v : sq) v = v * v;
    CHECK(close(simd.sum_sqrt(sq.data(), n), scalar.sum_sqrt(sq.data(), n)));

    if (n > 0) {
      const auto [lo1, hi1] = simd.min_max(a.data(), n);
      const auto [lo2, hi2] = scalar.min_max(a.data(), n);
      CHECK(lo1 == lo2);
      CHECK(hi1 == hi2);
    }

    auto acc1 = random_vec(rng, n, 0.0, 1.0);
    auto acc2 = acc1;
    simd.accumulate_sq_diff(acc1.data(), a.data(), 0.25, n);
    scalar.accumulate_sq_diff(acc2.data(), a.data(), 0.25, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(acc1[i], acc2[i]));

    auto y1 = b, y2 = b;
    simd.add_scaled(y1.data(), a.data(), -1.5, n);
    scalar.add_scaled(y2.data(), a.data(), -1.5, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i]));

    auto z1 = a, z2 = a;
    simd.affine(z1.data(), 0.7, -0.3, n);
    scalar.affine(z2.data(), 0.7, -0.3, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(z1[i], z2[i]));
  }
  CHECK(active == kernels::active_backend());
}

TEST_CASE("fused multi-channel kernels match the scalar reference") {
  const kernels::KernelTable scalar = kernels::detail::scalar_table();
  const kernels::KernelTable& simd = kernels::table();
  Rng rng(7);
  for (const std::size_t m : {std::size_t(1), std::size_t(3), std::size_t(5), std::size_t(8)}) {
    for (const std::size_t n : {std::size_t(1), std::size_t(4), std::size_t(9),
                                std::size_t(257), std::size_t(4096)}) {
      std::vector<std::vector<double>> chans(m);
      std::vector<const double*> ptrs(m);
      for (std::size_t c = 0; c < m; ++c) {
        chans[c] = random_vec(rng, n);
        ptrs[c] = chans[c].data();
      }
      const auto mu = random_vec(rng, m);
      CHECK(close(simd.sum_euclid(ptrs.data(), m, mu.data(), n),
                  scalar.sum_euclid(ptrs.data(), m, mu.data(), n)));
      const auto [lo1, hi1] = simd.sq_dist_min_max(ptrs.data(), m, mu.data(), n);
      const auto [lo2, hi2] = scalar.sq_dist_min_max(ptrs.data(), m, mu.data(), n);
      CHECK(close(lo1, lo2));
      CHECK(close(hi1, hi2));
    }
  }
}

TEST_CASE("forcing the scalar backend works") {
  const auto before = kernels::active_backend();
  kernels::force_backend(kernels::Backend::scalar);
  CHECK(kernels::backend_name() == "scalar");
  const std::vector<double> x = {4.0};
  CHECK(kernels::sum_sqrt(x.data(), 1) == doctest::Approx(2.0));
  kernels::force_backend(before);
}
