#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "emfd/airwave.hpp"
#include "support/test_grids.hpp"

using namespace emfd;

TEST_CASE("upward continuation is exact for resolvable harmonics") {
  const int n1 = 24, n2 = 20;  // deliberately not powers of two
  const double d1 = 50.0, d2 = 40.0, dz = 25.0;
  boundary::AirwavePlan plan(n1, n2, d1, d2, dz, 2);

  std::vector<double> src(static_cast<size_t>(n1) * n2);
  std::vector<double> g1(src.size()), g2(src.size());
  std::vector<double*> dst{g1.data(), g2.data()};

  const double two_pi = 2.0 * std::numbers::pi;
  for (const auto& [m1, m2] : {std::pair{1, 0}, {0, 1}, {3, 2}, {n1 / 2, 4}}) {
    const double kx = two_pi * m1 / (n1 * d1);
    const double ky = two_pi * m2 / (n2 * d2);
    const double kh = std::hypot(kx, ky);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i)
        src[i + static_cast<size_t>(n1) * j] = std::cos(kx * i * d1 + ky * j * d2);
    plan.continue_up(src.data(), dst);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) {
        const size_t q = i + static_cast<size_t>(n1) * j;
        CHECK(std::abs(g1[q] - src[q] * std::exp(-kh * dz)) < 1e-12);
        CHECK(std::abs(g2[q] - src[q] * std::exp(-kh * 2 * dz)) < 1e-12);
      }
  }
}

TEST_CASE("constant plane passes unchanged at every level") {
  const int n1 = 9, n2 = 7;
  boundary::AirwavePlan plan(n1, n2, 10.0, 10.0, 5.0, 3);
  std::vector<double> src(static_cast<size_t>(n1) * n2, 4.25);
  std::vector<double> g(src.size()), g2(src.size()), g3(src.size());
  std::vector<double*> dst{g.data(), g2.data(), g3.data()};
  plan.continue_up(src.data(), dst);
  for (double v : g) CHECK(v == doctest::Approx(4.25).epsilon(1e-13));
  for (double v : g3) CHECK(v == doctest::Approx(4.25).epsilon(1e-13));
}

TEST_CASE("continuation is linear") {
  const int n1 = 12, n2 = 12;
  boundary::AirwavePlan plan(n1, n2, 30.0, 30.0, 15.0, 1);
  std::vector<double> a(static_cast<size_t>(n1) * n2), b(a.size()), sum(a.size());
  unsigned state = 12345;
  const auto rnd = [&state]() {
    state = state * 1664525u + 1013904223u;
    return static_cast<double>(state) / 4294967296.0 - 0.5;
  };
  for (size_t q = 0; q < a.size(); ++q) {
    a[q] = rnd();
    b[q] = rnd();
    sum[q] = a[q] + b[q];
  }
  std::vector<double> ga(a.size()), gb(a.size()), gs(a.size());
  std::vector<double*> da{ga.data()}, db{gb.data()}, ds{gs.data()};
  plan.continue_up(a.data(), da);
  plan.continue_up(b.data(), db);
  plan.continue_up(sum.data(), ds);
  for (size_t q = 0; q < a.size(); ++q) CHECK(std::abs(gs[q] - ga[q] - gb[q]) < 1e-13);
}

TEST_CASE("nonuniform horizontal grids reject the airwave option") {
  auto ax = test::stretched_axis(0.0, 1.0, 8, 8, 1.1, 0);
  auto ay = test::uniform_axis(0.0, 16.0, 16, 0);
  auto az = test::uniform_axis(0.0, 16.0, 16, 0);
  const auto grid = gridgen::assemble_grid(ax, ay, az, 1, true);
  CHECK_THROWS(boundary::AirwaveOperator(grid));
}
