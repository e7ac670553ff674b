#include <doctest.h>

#include <cmath>
#include <random>

#include "emfd/fdcoeff.hpp"
#include "support/exact_vandermonde.hpp"

using namespace emfd;
using fdcoeff::NodeStencil;

namespace {

// random staggered stencil: L gaps below and above the center, gap ratio
// bounded by `spread`
NodeStencil random_stencil(std::mt19937& rng, int L, double spread, double center) {
  std::uniform_real_distribution<double> gap(1.0, spread);
  std::uniform_real_distribution<double> sc(0.05, 2.0);
  const double scale = sc(rng);
  NodeStencil st;
  st.center = center;
  std::vector<double> below, above;
  double acc = 0.0;
  for (int l = 0; l < L; ++l) {
    acc += gap(rng) * scale;
    below.push_back(center - acc);
  }
  acc = 0.0;
  for (int l = 0; l < L; ++l) {
    acc += gap(rng) * scale;
    above.push_back(center + acc);
  }
  st.nodes.insert(st.nodes.end(), below.rbegin(), below.rend());
  st.nodes.insert(st.nodes.end(), above.begin(), above.end());
  return st;
}

}  // namespace

TEST_CASE("two-node derivative row recovers the classical staggered operator") {
  const double dx = 0.37;
  NodeStencil st{0.0, {-dx / 2, dx / 2}};
  const auto rows = fdcoeff::vandermonde_rows(st, 1);
  CHECK(rows[1].weights[0] == doctest::Approx(-1.0 / dx).epsilon(1e-14));
  CHECK(rows[1].weights[1] == doctest::Approx(1.0 / dx).epsilon(1e-14));
  // order 0: midpoint average
  CHECK(rows[0].weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rows[0].weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("four-node uniform staggered derivative row") {
  const double dx = 1.0, h = dx / 2;
  NodeStencil st{0.0, {-3 * h, -h, h, 3 * h}};
  const auto rows = fdcoeff::vandermonde_rows(st, 1);
  CHECK(rows[1].weights[0] == doctest::Approx(1.0 / 24 / dx).epsilon(1e-13));
  CHECK(rows[1].weights[1] == doctest::Approx(-9.0 / 8 / dx).epsilon(1e-13));
  CHECK(rows[1].weights[2] == doctest::Approx(9.0 / 8 / dx).epsilon(1e-13));
  CHECK(rows[1].weights[3] == doctest::Approx(-1.0 / 24 / dx).epsilon(1e-13));
}

TEST_CASE("rejects duplicate nodes and excessive derivative order") {
  CHECK_THROWS(fdcoeff::vandermonde_rows({0.0, {-1.0, -1.0, 1.0, 2.0}}, 1));
  CHECK_THROWS(fdcoeff::vandermonde_rows({0.0, {-1.0, 1.0}}, 2));
}

TEST_CASE("interpolation weights") {
  SUBCASE("indicator row when the center coincides with a node") {
    NodeStencil st{1.0, {0.0, 1.0, 3.0, 7.0}};
    const auto row = fdcoeff::interpolation_weights(st);
    CHECK(row.weights[0] == 0.0);
    CHECK(row.weights[1] == 1.0);
    CHECK(row.weights[2] == 0.0);
    CHECK(row.weights[3] == 0.0);
  }
  SUBCASE("linear interpolation between two nodes") {
    NodeStencil st{0.25, {0.0, 1.0}};
    const auto row = fdcoeff::interpolation_weights(st);
    CHECK(row.weights[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(row.weights[1] == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("reproduces polynomials up to degree 3 on scattered nodes") {
    NodeStencil st{2.0, {0.0, 1.0, 3.0, 7.0}};
    const auto row = fdcoeff::interpolation_weights(st);
    double v = 0.0;
    for (size_t j = 0; j < st.nodes.size(); ++j)
      v += row.weights[j] * st.nodes[j] * st.nodes[j];
    CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("extrapolation is rejected") {
    CHECK_THROWS(fdcoeff::interpolation_weights({-0.5, {0.0, 1.0, 2.0, 3.0}}));
  }
}

TEST_CASE("uniform staggered coefficients from the moment system") {
  const auto b1 = fdcoeff::uniform_staggered_weights(1);
  REQUIRE(b1.b.size() == 1);
  CHECK(b1.b[0] == 1.0);

  const auto b2 = fdcoeff::uniform_staggered_weights(2);
  CHECK(b2.b[0] == doctest::Approx(9.0 / 8).epsilon(1e-15));
  CHECK(b2.b[1] == doctest::Approx(-1.0 / 8).epsilon(1e-15));

  SUBCASE("matches the exact rational solve for all supported L") {
    for (int L = 1; L <= 8; ++L) {
      const auto b = fdcoeff::uniform_staggered_weights(L);
      const auto exact = test::exact_uniform_staggered(L);
      double sum = 0.0;
      for (int l = 0; l < L; ++l) {
        CHECK(b.b[l] ==
              doctest::Approx(static_cast<double>(exact[l])).epsilon(1e-12));
        sum += b.b[l];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));  // first moment row
    }
  }
  SUBCASE("expanded row agrees with the generic Vandermonde route") {
    const double dx = 0.73;
    for (int L = 1; L <= 4; ++L) {
      const auto row = fdcoeff::uniform_staggered_row(L, dx);
      NodeStencil st;
      st.center = 0.0;
      for (int l = -L; l < L; ++l) st.nodes.push_back((l + 0.5) * dx);
      const auto generic = fdcoeff::vandermonde_rows(st, 1)[1];
      for (int j = 0; j < 2 * L; ++j)
        CHECK(row.weights[j] == doctest::Approx(generic.weights[j]).epsilon(1e-12));
    }
  }
  CHECK_THROWS(fdcoeff::uniform_staggered_weights(0));
  CHECK_THROWS(fdcoeff::uniform_staggered_weights(9));
}

TEST_CASE("scaled region weights reproduce fresh solves on a geometric grid") {
  const int L = 2;
  const double dx = 10.0, r = 1.05;
  // reference nodes of a pure geometric progression
  std::vector<double> ref{0.0};
  double d = dx;
  for (int c = 0; c < 24; ++c) {
    ref.push_back(ref.back() + d);
    d *= r;
  }
  std::vector<double> stag(ref.size() - 1);
  for (size_t c = 0; c + 1 < ref.size(); ++c) stag[c] = 0.5 * (ref[c] + ref[c + 1]);

  const auto stencil_at = [&](int s) {
    NodeStencil st;
    st.center = stag[s];
    st.nodes.assign(ref.begin() + (s - L + 1), ref.begin() + (s + L + 1));
    return st;
  };
  const auto base = fdcoeff::vandermonde_rows(stencil_at(L), 1)[1];

  SUBCASE("r = 1 leaves weights unchanged") {
    const auto w = fdcoeff::scaled_region_weights(base, 1.0, 7);
    for (int j = 0; j < 2 * L; ++j) CHECK(w.weights[j] == base.weights[j]);
  }
  SUBCASE("matches a direct solve ten nodes in") {
    const int i = 10;
    const auto scaled = fdcoeff::scaled_region_weights(base, r, i);
    const auto direct = fdcoeff::vandermonde_rows(stencil_at(L + i), 1)[1];
    for (int j = 0; j < 2 * L; ++j)
      CHECK(std::abs(scaled.weights[j] - direct.weights[j]) <=
            1e-12 * std::abs(direct.weights[j]));
  }
  SUBCASE("derivative of a constant is zero") {
    const auto scaled = fdcoeff::scaled_region_weights(base, r, 5);
    double s = 0.0;
    for (double w : scaled.weights) s += w;
    CHECK(std::abs(s) < 1e-12 * std::abs(scaled.weights[1]));
  }
}

TEST_CASE("polynomial exactness on random stretched stencils") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> cdist(-1.0, 1.0);
  for (int L = 1; L <= 4; ++L) {
    for (int trial = 0; trial < 60; ++trial) {
      const NodeStencil st = random_stencil(rng, L, 20.0, cdist(rng));
      const auto rows = fdcoeff::vandermonde_rows(st, 1);
      for (int p = 0; p <= 2 * L - 1; ++p) {
        double num = 0.0, mag = 0.0;
        for (size_t j = 0; j < st.nodes.size(); ++j) {
          const double term = rows[1].weights[j] * std::pow(st.nodes[j], p);
          num += term;
          mag += std::abs(term);
        }
        const double exact = p == 0 ? 0.0 : p * std::pow(st.center, p - 1);
        const double scale = std::max({mag, std::abs(exact), 1e-300});
        CHECK(std::abs(num - exact) <= 1e-10 * scale);
      }
    }
  }
}

TEST_CASE("fast solver matches exact rational solves at spread ratio 20") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> cdist(-1.0, 1.0);
  for (int L = 1; L <= 4; ++L) {
    for (int trial = 0; trial < 12; ++trial) {
      const NodeStencil st = random_stencil(rng, L, 20.0, cdist(rng));
      const auto rows = fdcoeff::vandermonde_rows(st, 2 * L - 1);
      for (int order : {0, 1}) {
        const auto exact = test::exact_weight_row(st.nodes, st.center, order);
        double scale = 0.0;
        for (const auto& e : exact) scale = std::max(scale, std::abs(static_cast<double>(e)));
        for (size_t j = 0; j < st.nodes.size(); ++j)
          CHECK(std::abs(rows[order].weights[j] - static_cast<double>(exact[j])) <=
                1e-10 * scale);
      }
    }
  }
}

TEST_CASE("derivative error of sin decays at order 2L on stretched grids") {
  // self-similar stencil from an r-progression of cells, scaled by h; the
  // base scale per L keeps the finest errors well above round-off
  for (const double r : {1.0, 1.02, 1.05}) {
    for (int L = 1; L <= 3; ++L) {
      std::vector<double> t{0.0};
      double d = 1.0;
      for (int c = 0; c < 2 * L - 1; ++c) {
        t.push_back(t.back() + d);
        d *= r;
      }
      const double tc = 0.5 * (t[L - 1] + t[L]);
      const double h0 = L == 1 ? 0.2 : (L == 2 ? 0.4 : 0.8);

      std::vector<double> hs, errs;
      for (int level = 0; level < 5; ++level) {
        const double h = h0 / std::pow(2.0, level);
        double emax = 0.0;
        for (const double c0 : {0.3, 0.7, 1.1}) {
          NodeStencil st;
          st.center = c0;
          for (double tj : t) st.nodes.push_back(c0 + h * (tj - tc));
          const auto row = fdcoeff::vandermonde_rows(st, 1)[1];
          double v = 0.0;
          for (int j = 0; j < 2 * L; ++j) v += row.weights[j] * std::sin(st.nodes[j]);
          emax = std::max(emax, std::abs(v - std::cos(c0)));
        }
        hs.push_back(h);
        errs.push_back(emax);
      }
      // least-squares slope of log err vs log h
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const int n = static_cast<int>(hs.size());
      for (int q = 0; q < n; ++q) {
        const double X = std::log(hs[q]), Y = std::log(errs[q]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      CHECK(std::abs(slope - 2.0 * L) <= 0.3);
    }
  }
}
