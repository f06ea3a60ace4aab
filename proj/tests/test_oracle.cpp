#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <fftw3.h>

#include "doctest.h"
#include "helpers.hpp"
#include "trimode/oracle.hpp"
#include "trimode/rng.hpp"

using namespace trimode;
using testutil::rel;

namespace {

SystemConfig custom(double gamma_m, double K0, double gamma_e = -1.0) {
  auto p = presets::table1();
  p.mechanical.gamma_m = gamma_m;
  p.drive = DriveConfig::pump(K0);
  if (gamma_e >= 0.0) p.cavity.gamma_e = gamma_e;
  return SystemConfig::create(p);
}

// Fraction of bins in [omega_min, omega_max] where the estimate lies within
// max(3 sigma, tol * expected).
template <class F>
double agreement(const OracleEstimate& e, double omega_min, double tol, F expected,
                 double omega_max = 2.25e6) {
  std::size_t ok = 0, n = 0;
  for (std::size_t i = 0; i < e.grid.size(); ++i) {
    if (e.grid[i] < omega_min || e.grid[i] > omega_max) continue;
    const double x = expected(e.grid[i]);
    ok += std::abs(e.psd[i] - x) <= std::max(3 * e.stderr_[i], tol * x);
    ++n;
  }
  return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
}

double row_power(const SdeSystem& sys, int row, double omega,
                 std::array<double, 5> gains = {1, 1, 1, 1, 1}) {
  const auto H = state_space_response(sys, omega);
  double s = 0;
  for (int j = 0; j < 5; ++j) s += gains[j] * gains[j] * std::norm(H(row, j));
  return s;
}

SimulationOptions sim(double duration, double dt, std::uint64_t seed = 3) {
  SimulationOptions o;
  o.duration = duration;
  o.dt = dt;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("white noise of known variance has unit PSD") {
  const double dt = 1e-6;
  const std::size_t len = 256;
  std::vector<double> x(len * 128);
  NormalStream rng(5, 0, 0);
  for (std::size_t i = 0; i < x.size(); i += 4) {
    const auto b = rng.next_block();
    for (int j = 0; j < 4; ++j) x[i + j] = b[j] / std::sqrt(2 * dt);
  }
  for (auto win : {Window::Hann, Window::Rectangular}) {
    const auto e = estimate_psd(x, dt, len, win);
    CHECK(e.segments == 128);
    CHECK(e.grid.size() == len / 2 - 1);
    CHECK(rel(e.grid[0], 2 * constants::pi / (len * dt)) < 1e-14);
    const double mean = std::accumulate(e.psd.begin(), e.psd.end(), 0.0) / e.psd.size();
    CHECK(std::abs(mean - 1.0) < 0.02);
    CHECK(agreement(e, 0.0, 0.0, [](double) { return 1.0; }, 1e300) > 0.95);
  }

  SUBCASE("four times the segments halves the standard error") {
    const std::vector<double> quarter(x.begin(), x.begin() + len * 32);
    const auto a = estimate_psd(quarter, dt, len);
    const auto b = estimate_psd(x, dt, len);
    const double sa = std::accumulate(a.stderr_.begin(), a.stderr_.end(), 0.0);
    const double sb = std::accumulate(b.stderr_.begin(), b.stderr_.end(), 0.0);
    CHECK(std::abs(sa / sb - 2.0) < 0.2);
  }
  CHECK_THROWS_AS(estimate_psd(std::vector<double>(len * 31, 0.0), dt, len), ConfigError);
}

TEST_CASE("undriven lossless cavity reflects vacuum") {
  const auto cfg = custom(10.0, 0.0, 0.0);
  const double dt = 1e-7;
  const std::size_t len = 1024;
  const auto out = simulate(cfg, QuadratureFamily::amplitude(), sim(len * 64 * dt, dt));
  for (const auto* port : {&out.mechanical, &out.open}) {
    const auto e = estimate_psd(*port, dt, len);
    const double mean = std::accumulate(e.psd.begin(), e.psd.end(), 0.0) / e.psd.size();
    CHECK(std::abs(mean - 1.0) < 0.03);
  }
}

TEST_CASE("intracavity quadrature is a Lorentzian") {
  const auto cfg = custom(10.0, 0.0);
  const double g = cfg.cavity().gamma(), dt = 1e-7;
  const std::size_t len = 4096;
  auto o = sim(len * 64 * dt, dt);
  o.record_state = true;
  const auto out = simulate(cfg, QuadratureFamily::amplitude(), o);
  std::vector<double> gp(out.state.size() / 3);
  for (std::size_t i = 0; i < gp.size(); ++i) gp[i] = out.state[3 * i];
  const auto e = estimate_psd(gp, dt, len);
  // dg = -g g dt + sqrt(2 g0) dW_a + sqrt(2 ge) dW_e, single-sided input PSD 1.
  const auto lorentz = [g](double w) { return 2 * g / (g * g + w * w); };
  CHECK(agreement(e, 0.0, 0.05, lorentz) > 0.95);
}

TEST_CASE("simulated ports follow the SDE's own frequency response") {
  const auto cfg = testutil::table1();
  const double g0 = cfg.cavity().gamma0;
  const SqueezeConfig sq = TwoPhotonSqueezing{0.5 * g0};
  const auto mc = testutil::make_case(sq, Combination::DifferencePort);
  ValidationOptions vo;
  vo.omega_lo_g0 = 0.05;
  const auto plan = plan_segments(cfg, mc, vo);
  const auto out = simulate(cfg, sq, QuadratureFamily::amplitude(), sim(plan.length * 48 * plan.dt, plan.dt));
  const auto sys = SdeSystem::build(cfg, sq, Quadrature::Amplitude);
  const int row = sys.mechanical_row();
  const double w_min = 10 * 2 * constants::pi / (plan.length * plan.dt);
  const auto em = estimate_psd(out.mechanical, plan.dt, plan.length);
  CHECK(agreement(em, w_min, 0.05, [&](double w) { return row_power(sys, row, w); }) > 0.95);
  const auto eo = estimate_psd(out.open, plan.dt, plan.length);
  CHECK(agreement(eo, w_min, 0.05, [&](double w) { return row_power(sys, 1 - row, w); }) > 0.95);
}

TEST_CASE("output is linear in the input noise") {
  const auto cfg = custom(1e3, 1e5);
  const double dt = 1e-7;
  auto a = sim(2e-2, dt);
  a.integrator = Integrator::EulerMaruyama;
  auto b = a;
  b.input_gains = {2, 2, 2, 2, 2};
  {
    const auto ya = simulate(cfg, QuadratureFamily::amplitude(), a);
    const auto yb = simulate(cfg, QuadratureFamily::amplitude(), b);
    for (std::size_t i = 0; i < ya.mechanical.size(); i += 97)
      CHECK(rel(yb.mechanical[i], 2 * ya.mechanical[i]) < 1e-12);
  }
  // The exact scheme draws through a covariance square root whose basis is
  // not tied to the input scale, so only the statistics must follow.
  a.integrator = b.integrator = Integrator::Exact;
  const auto ea = estimate_psd(simulate(cfg, QuadratureFamily::amplitude(), a).mechanical, dt, 1024);
  const auto eb = estimate_psd(simulate(cfg, QuadratureFamily::amplitude(), b).mechanical, dt, 1024);
  const double sa = std::accumulate(ea.psd.begin(), ea.psd.end(), 0.0);
  const double sb = std::accumulate(eb.psd.begin(), eb.psd.end(), 0.0);
  CHECK(std::abs(sb / sa - 4.0) < 0.08);
}

TEST_CASE("stationary variances solve the Lyapunov equation") {
  const auto cfg = custom(2e4, 1e5);
  const SqueezeConfig sq = TwoPhotonSqueezing{0.5 * cfg.cavity().gamma0};
  const auto sys = SdeSystem::build(cfg, sq, Quadrature::Amplitude);
  const auto P = stationary_covariance(sys);
  const Eigen::Matrix3d resid = sys.drift * P + P * sys.drift.transpose() +
                                0.5 * sys.noise * sys.noise.transpose();
  CHECK(resid.norm() < 1e-9 * P.norm() * sys.drift.norm());

  auto o = sim(0.2, 1e-7);
  o.record_state = true;
  const auto out = simulate(cfg, sq, QuadratureFamily::amplitude(), o);
  const std::size_t n = out.state.size() / 3;
  for (int s = 0; s < 3; ++s) {
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) v += out.state[3 * i + s] * out.state[3 * i + s];
    CHECK(std::abs(v / n / P(s, s) - 1.0) < 0.1);
  }
}

TEST_CASE("back action enters through the open-port vacuum") {
  const auto cfg = testutil::table1();
  const auto sys = SdeSystem::build(cfg, NoSqueezing{}, Quadrature::Amplitude);
  const int row = sys.mechanical_row();
  const std::array<double, 5> no_ba{0, 1, 0, 1, 1};
  const double dt = 1e-7;
  const std::size_t len = 8192;
  auto o = sim(len * 40 * dt, dt);
  o.input_gains = no_ba;
  const auto out = simulate(cfg, NoSqueezing{}, QuadratureFamily::amplitude(), o);
  const auto e = estimate_psd(out.mechanical, dt, len);
  const double w_min = 10 * 2 * constants::pi / (len * dt);
  CHECK(agreement(e, w_min, 0.05, [&](double w) { return row_power(sys, row, w, no_ba); }) > 0.95);
  // Below Omega = K the removed inputs outweigh the shot noise.
  const double w = 0.3 * cfg.K0();
  const auto H = state_space_response(sys, w);
  CHECK(std::norm(H(row, 0)) + std::norm(H(row, 2)) > 5 * (std::norm(H(row, 1)) + std::norm(H(row, 3))));
}

TEST_CASE("deterministic pulse response matches the transfer function") {
  const auto cfg = custom(1e4, constants::pi / 28e-6);
  const double dt = 1e-7;
  const std::size_t n = 32768, on = 2000, width = 280;
  auto o = sim(n * dt, dt);
  o.burn_in = 0.0;
  o.input_gains = {0, 0, 0, 0, 0};
  o.signal = [&](double t) {
    const double k = t / dt;
    return (k >= on && k < on + width) ? 1.0 : 0.0;
  };
  const auto out = simulate(cfg, NoSqueezing{}, QuadratureFamily::amplitude(), o);
  const auto sys = SdeSystem::build(cfg, NoSqueezing{}, Quadrature::Amplitude);
  const int row = sys.mechanical_row();

  std::vector<double> f(n, 0.0), y(n);
  for (std::size_t k = on; k < on + width; ++k) f[k] = 1.0;
  const std::size_t m = n / 2 + 1;
  auto* F = fftw_alloc_complex(m);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), f.data(), F, FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), F, y.data(), FFTW_ESTIMATE);
  fftw_execute(fwd);
  for (std::size_t k = 0; k < m; ++k) {
    const double w = 2 * constants::pi * k / (n * dt);
    // FFTW's kernel is exp(-i w t); the response uses exp(+i Omega t).
    const cplx h = std::conj(state_space_response(sys, w)(row, 5));
    const cplx v = cplx{F[k][0], F[k][1]} * h / static_cast<double>(n);
    F[k][0] = v.real();
    F[k][1] = v.imag();
  }
  fftw_execute(inv);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
  fftw_free(F);

  double peak = 0, err = 0;
  for (std::size_t k = 0; k < n; ++k) {
    peak = std::max(peak, std::abs(y[k]));
    err = std::max(err, std::abs(out.mechanical[k] - y[k]));
  }
  CHECK(peak > 0);
  CHECK(err < 0.01 * peak);
  for (double v : out.open) CHECK(std::abs(v) < 1e-12 * peak);
}

TEST_CASE("the SDE signal response is the analytic one up to a constant") {
  const auto cfg = testutil::table1();
  for (auto sq : {SqueezeConfig{NoSqueezing{}}, SqueezeConfig{TwoPhotonSqueezing{1e5}},
                  SqueezeConfig{DegenerateSqueezing{1e5}}}) {
    const auto sys = SdeSystem::build(cfg, sq, Quadrature::Amplitude);
    const auto mc = testutil::make_case(sq, Combination::DifferencePort);
    double first = 0;
    for (double w : {1e2, 1e4, 1e5, 1e6}) {
      const double r = std::abs(state_space_response(sys, w)(sys.mechanical_row(), 5)) /
                       std::abs(output_transfer(mc, cfg, w).signal_gain());
      if (first == 0) first = r;
      CHECK(rel(r, first) < 1e-9);
    }
  }
}

TEST_CASE("Euler-Maruyama agrees with exact discretization at small steps") {
  const auto cfg = testutil::table1();
  const double dt = 2e-8;
  const std::size_t len = 4096;
  auto a = sim(len * 40 * dt, dt);
  auto b = a;
  b.integrator = Integrator::EulerMaruyama;
  const auto ya = simulate(cfg, QuadratureFamily::amplitude(), a);
  const auto yb = simulate(cfg, QuadratureFamily::amplitude(), b);
  const auto ea = estimate_psd(ya.mechanical, dt, len);
  const auto eb = estimate_psd(yb.mechanical, dt, len);
  std::size_t ok = 0, n = 0;
  for (std::size_t i = 10; i < ea.psd.size() / 4; ++i) {
    const double s = std::hypot(ea.stderr_[i], eb.stderr_[i]);
    ok += std::abs(ea.psd[i] - eb.psd[i]) <= std::max(3 * s, 0.05 * ea.psd[i]);
    ++n;
  }
  CHECK(static_cast<double>(ok) / n > 0.95);
}

TEST_CASE("simulation guards") {
  const auto cfg = testutil::table1();
  CHECK_THROWS_AS(simulate(cfg, QuadratureFamily::amplitude(), sim(1e-3, 1e-5)), ConfigError);
  CHECK_THROWS_AS(simulate(cfg, QuadratureFamily::amplitude(), sim(1e-5, 1e-7)), ConfigError);
  CHECK_THROWS_AS(SdeSystem::build(cfg, TwoPhotonSqueezing{2 * cfg.cavity().gamma()}, Quadrature::Amplitude),
                  StabilityError);
  const auto a = simulate(cfg, QuadratureFamily::amplitude(), sim(1e-3, 1e-7, 11));
  const auto b = simulate(cfg, QuadratureFamily::amplitude(), sim(1e-3, 1e-7, 11));
  CHECK(a.mechanical == b.mechanical);
  const auto c = simulate(cfg, QuadratureFamily::amplitude(), sim(1e-3, 1e-7, 12));
  CHECK(a.mechanical != c.mechanical);
}

TEST_CASE("bin selection") {
  const double dt = 1e-6;
  const std::size_t len = 1000;
  const double d = 2 * constants::pi / (len * dt);
  const auto bins = select_bins(len, dt, {0.5 * d, 3 * d, 3.2 * d, 10 * d, 1e9});
  CHECK(bins == std::vector<std::size_t>{3, 10});
}

TEST_CASE("validation: subtracted lossless case passes, perturbed control fails") {
  const auto cfg = custom(presets::table1().mechanical.gamma_m, constants::pi / 28e-6, 0.0);
  ValidationOptions vo;
  vo.segments = 64;
  vo.omega_lo_g0 = 0.05;
  const auto mc = testutil::make_case(NoSqueezing{}, Combination::Subtracted);
  const auto rep = validate(cfg, mc, vo);
  CHECK(rep.passed);
  CHECK(rep.segments == 64);
  CHECK(rep.points.size() > 40);

  const auto raw = validate(cfg, testutil::make_case(NoSqueezing{}, Combination::DifferencePort), vo);
  CHECK(raw.passed);

  vo.perturb_kappa_g0 = 0.2;
  const auto neg = validate(cfg, testutil::make_case(NoSqueezing{}, Combination::DifferencePort), vo);
  CHECK_FALSE(neg.passed);

  vo.perturb_kappa_g0 = 0.0;
  vo.segments = 16;
  CHECK_THROWS_AS(validate(cfg, mc, vo), ConfigError);
}

TEST_CASE("validation is reproducible for a fixed seed") {
  const auto cfg = testutil::lossless_table1();
  ValidationOptions vo;
  vo.segments = 32;
  vo.omega_lo_g0 = 0.1;
  const MeasurementCase mc;
  const auto a = validate(cfg, mc, vo);
  const auto b = validate(cfg, mc, vo);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].estimate == b.points[i].estimate);
}

}
