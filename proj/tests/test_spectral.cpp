#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "emfd/kernel.hpp"
#include "support/test_grids.hpp"

using namespace emfd;
using kernel::Component;
using kernel::SpectralAccumulator;
using cplx = std::complex<double>;

TEST_CASE("complex frequency at the transform base") {
  SpectralAccumulator acc({1.0}, 2.0 * std::numbers::pi, 1e-3, 1);
  // omega = omega0 -> omega' = (1+i) omega0
  CHECK(acc.omega_prime(0).real() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-14));
  CHECK(acc.omega_prime(0).imag() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("left Riemann accumulation converges to the analytic integral at first order") {
  const double w0 = 2.0 * std::numbers::pi, T = 2.0;
  const auto run = [&](double dt) {
    SpectralAccumulator acc({1.0}, w0, dt, 1);
    const long N = static_cast<long>(std::round(T / dt));
    for (long n = 1; n <= N; ++n) acc.accumulate(0, 1.0, acc.phases_at(n * dt));
    const cplx iw = cplx(0.0, 1.0) * acc.omega_prime(0);
    const cplx exact = (std::exp(iw * T) - 1.0) / iw;
    return std::abs(acc.sum(0, 0) - exact);
  };
  const double e1 = run(1e-3), e2 = run(5e-4);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("late-time damping makes a 10/sqrt(w w0) tail negligible") {
  const double w0 = 2.0 * std::numbers::pi;
  const double s = std::sqrt(w0 * w0);  // omega = omega0 case
  const double T0 = 10.0 / s, dt = T0 / 4000.0;
  SpectralAccumulator head({1.0}, w0, dt, 1), tail({1.0}, w0, dt, 1);
  for (long n = 1; n * dt <= 4 * T0; ++n) {
    const auto ph = head.phases_at(n * dt);
    if (n * dt <= T0) head.accumulate(0, 1.0, ph);
    else tail.accumulate(0, 1.0, ph);
  }
  CHECK(std::abs(tail.sum(0, 0)) / std::abs(head.sum(0, 0)) < 5e-5);
}

TEST_CASE("green normalization") {
  const double w0 = 2.0 * std::numbers::pi;
  const double dt = 5e-4;
  const auto wave = kernel::SourceWaveform::design(3.0, 1.0);
  // request omega = 2*omega0 so the electric factor is exactly sqrt(-i)
  SpectralAccumulator acc({2.0}, w0, dt, 2);
  const long N = static_cast<long>(std::ceil(wave.end_time() / dt)) + 1;
  for (long n = 0; n < N; ++n) {
    const double t = (n + 0.5) * dt;
    const auto ph = acc.phases_at(t);
    acc.accumulate(0, wave.value(t), ph);  // entry 0: "field" = waveform itself
    acc.accumulate(1, wave.value(t), ph);
  }
  const auto spectrum = kernel::waveform_spectrum(wave, acc);
  std::vector<kernel::SampleEntry> entries(2);
  entries[0].receiver = 0;
  entries[0].component = Component::Ex;
  entries[1].receiver = 0;
  entries[1].component = Component::Hx;
  const auto recs = kernel::green_functions(acc, entries, spectrum);
  REQUIRE(recs.size() == 2);
  SUBCASE("electric record carries exp(-i pi/4)") {
    CHECK(recs[0].reliable);
    CHECK(recs[0].value.real() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(recs[0].value.imag() == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-10));
  }
  SUBCASE("magnetic record is the raw ratio") {
    CHECK(recs[1].value.real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(recs[1].value.imag() == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("scaling the waveform leaves green functions unchanged") {
    SpectralAccumulator acc10({2.0}, w0, dt, 2);
    const auto wave10 = kernel::SourceWaveform::design(3.0, 10.0);
    for (long n = 0; n < N; ++n) {
      const double t = (n + 0.5) * dt;
      const auto ph = acc10.phases_at(t);
      acc10.accumulate(0, wave10.value(t), ph);
      acc10.accumulate(1, wave10.value(t), ph);
    }
    const auto rec10 =
        kernel::green_functions(acc10, entries, kernel::waveform_spectrum(wave10, acc10));
    CHECK(std::abs(rec10[0].value - recs[0].value) < 1e-12);
  }
}

TEST_CASE("receiver sampling interpolates the grid field") {
  const auto s = test::homogeneous_setup(10, 10.0, 2, 2, 1.0, 1.0);
  std::vector<kernel::Receiver> rx{{1.0, 2.0, 3.0}, {-17.5, 0.0, 21.0}};
  const auto entries = kernel::build_sample_entries(
      s.grid, rx, {Component::Ex, Component::Hz});
  REQUIRE(entries.size() == 4);
  // a linear field in x is reproduced exactly by the interpolation rows
  Field3 ex(s.grid.x().nref() - 1, s.grid.y().nref(), s.grid.z().nref());
  for (int k = 0; k < ex.nz(); ++k)
    for (int j = 0; j < ex.ny(); ++j)
      for (int i = 0; i < ex.nx(); ++i) ex(i, j, k) = 2.0 * s.grid.x().stag[i] + 1.0;
  CHECK(entries[0].sample(ex) == doctest::Approx(2.0 * rx[0].x + 1.0).epsilon(1e-12));
  CHECK(entries[2].sample(ex) == doctest::Approx(2.0 * rx[1].x + 1.0).epsilon(1e-12));

  SUBCASE("receivers outside the interior are rejected") {
    CHECK_THROWS(kernel::build_sample_entries(s.grid, {{1e9, 0.0, 0.0}}, {Component::Ex}));
  }
}

TEST_CASE("convergence bookkeeping") {
  SUBCASE("zero source converges at the second checkpoint") {
    const auto s = test::homogeneous_setup(8, 100.0, 2, 1, 1.0, 1.0);
    kernel::KernelOptions opt;
    opt.dt = s.rep.dt;
    kernel::Kernel k(s.grid, s.med, s.tables, opt);
    const auto entries =
        kernel::build_sample_entries(s.grid, {{10.0, 0.0, 0.0}}, {Component::Ex});
    SpectralAccumulator acc({1.0}, 1.0, s.rep.dt, static_cast<int>(entries.size()));
    kernel::TimeLoopOptions lopt;
    lopt.max_steps = 1000;
    lopt.cadence = 10;
    const auto res = kernel::run_time_loop(k, acc, entries, lopt);
    CHECK(res.converged);
    CHECK(res.steps == 20);
  }
  SUBCASE("zero tolerance never converges and runs to the cap") {
    const auto s = test::homogeneous_setup(8, 100.0, 2, 1, 1.0, 1.0);
    kernel::KernelOptions opt;
    opt.dt = s.rep.dt;
    kernel::Kernel k(s.grid, s.med, s.tables, opt);
    const auto entries =
        kernel::build_sample_entries(s.grid, {{10.0, 0.0, 0.0}}, {Component::Ex});
    SpectralAccumulator acc({1.0}, 1.0, s.rep.dt, static_cast<int>(entries.size()));
    kernel::TimeLoopOptions lopt;
    lopt.max_steps = 95;
    lopt.cadence = 10;
    lopt.convergence_tol = 0.0;
    const auto res = kernel::run_time_loop(k, acc, entries, lopt);
    CHECK(!res.converged);
    CHECK(res.steps == 95);
  }
}

TEST_CASE("doubling the source doubles every accumulated spectrum") {
  const auto s = test::homogeneous_setup(10, 50.0, 4, 1, 1.0, 2.0 * std::numbers::pi);
  const auto entries = kernel::build_sample_entries(
      s.grid, {{40.0, 10.0, -20.0}}, {Component::Ex, Component::Hy});
  const auto run = [&](double moment) {
    kernel::KernelOptions opt;
    opt.dt = s.rep.dt;
    opt.f_source = 2.0;
    kernel::Kernel k(s.grid, s.med, s.tables, opt);
    kernel::DipoleSpec dip;
    dip.position = {0.0, 0.0, 0.0};
    dip.axis = 0;
    dip.waveform = kernel::SourceWaveform::design(s.med.c_min / (10 * 50.0), moment);
    k.set_dipole(dip);
    SpectralAccumulator acc({1.0}, 2.0 * std::numbers::pi, s.rep.dt,
                            static_cast<int>(entries.size()));
    kernel::TimeLoopOptions lopt;
    lopt.max_steps = 150;
    lopt.convergence_tol = 0.0;
    kernel::run_time_loop(k, acc, entries, lopt);
    return std::array<cplx, 2>{acc.sum(0, 0), acc.sum(1, 0)};
  };
  const auto a = run(1.0);
  const auto b = run(2.0);
  for (int e = 0; e < 2; ++e) {
    CHECK(std::abs(b[e] - 2.0 * a[e]) <= 1e-13 * std::abs(b[e]));
  }
}
