#include <doctest.h>

#include <cmath>

#include "emfd/cpml.hpp"
#include "support/test_grids.hpp"

using namespace emfd;
using boundary::CpmlConfig;

namespace {

const gridgen::Axis1D axis = test::uniform_axis(0.0, 40.0, 40, 12);

}  // namespace

TEST_CASE("profiles are identity in the interior and graded in the bands") {
  CpmlConfig cfg;
  const auto c = boundary::build_cpml_coeffs(axis, false, cfg, 1000.0, 1.0, 1e-3);
  CHECK(c.lo_end == 12);
  CHECK(c.hi_begin == c.n - 12);
  for (int i = c.lo_end; i < c.hi_begin; ++i) {
    CHECK(c.b[i] == 1.0);
    CHECK(c.a[i] == 0.0);
    CHECK(c.inv_kappa[i] == 1.0);
  }
  for (int i = 0; i < c.n; ++i) {
    CHECK(c.b[i] > 0.0);
    CHECK(c.b[i] <= 1.0);
  }
  // damping grows monotonically toward the outer boundary
  for (int i = 1; i < c.lo_end; ++i) CHECK(c.b[i] >= c.b[i - 1] - 1e-15);
  for (int i = c.hi_begin + 1; i < c.n; ++i) CHECK(c.b[i] <= c.b[i - 1] + 1e-15);
}

TEST_CASE("identity profile passes derivatives through unchanged") {
  CpmlConfig cfg;
  cfg.enabled = false;
  const auto c = boundary::build_cpml_coeffs(axis, true, cfg, 1000.0, 1.0, 1e-3);
  CHECK(c.lo_end == 0);
  CHECK(c.hi_begin == c.n);
}

TEST_CASE("memory variable recursion approaches its closed-form fixed point") {
  CpmlConfig cfg;
  const auto c = boundary::build_cpml_coeffs(axis, false, cfg, 1000.0, 1.0, 1e-3);
  const int node = 3;  // inside the low band
  REQUIRE(node < c.lo_end);
  const double b = c.b[node], a = c.a[node];
  REQUIRE(a != 0.0);
  const double d = 1.7;  // constant raw derivative
  double psi = 0.0;
  for (int n = 0; n < 4000; ++n) psi = b * psi + a * d;
  CHECK(psi == doctest::Approx(a * d / (1.0 - b)).epsilon(1e-10));
  // adjusted derivative with kappa = 1
  const double adjusted = d * c.inv_kappa[node] + psi;
  CHECK(adjusted == doctest::Approx(d * (1.0 + a / (1.0 - b))).epsilon(1e-10));
}

TEST_CASE("pure kappa stretching halves the derivative") {
  CpmlConfig cfg;
  cfg.kappa_max = 2.0;
  cfg.r0 = 1.0;         // sigma_max = 0
  cfg.alpha_scale = 0;  // alpha = 0
  const auto c = boundary::build_cpml_coeffs(axis, false, cfg, 1000.0, 1.0, 1e-3);
  const int node = 0;  // outer edge, full grading
  CHECK(c.b[node] == doctest::Approx(1.0));
  CHECK(c.a[node] == 0.0);
  const double d = 3.0;
  double psi = 0.0;
  psi = c.b[node] * psi + c.a[node] * d;
  CHECK(d * c.inv_kappa[node] + psi == doctest::Approx(d / 2.0).epsilon(1e-12));
}

TEST_CASE("airwave skips the top band on the z axis") {
  CpmlConfig cfg;
  const auto az = gridgen::build_axis(0.0, {{gridgen::RegionKind::Uniform, 40.0, 1.0, 40}}, 0, 12);
  const auto c = boundary::build_cpml_coeffs(az, false, cfg, 1000.0, 1.0, 1e-3, true);
  CHECK(c.lo_end == 0);
  CHECK(c.hi_begin == c.n - 12);
}
