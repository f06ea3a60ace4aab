#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace trimode;
using testutil::rel;

namespace {

std::vector<MeasurementCase> all_cases(double g0) {
  std::vector<MeasurementCase> out;
  for (auto comb : {Combination::DifferencePort, Combination::Subtracted}) {
    out.push_back(testutil::make_case(NoSqueezing{}, comb));
    for (double r : {0.0, 0.5, 0.9}) {
      out.push_back(testutil::make_case(TwoPhotonSqueezing{r * g0}, comb));
      out.push_back(testutil::make_case(DegenerateSqueezing{r * g0}, comb));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("assembled and closed-form spectra agree for every form") {
  std::size_t forms_seen = 0;
  std::array<bool, 6> seen{};
  for (auto cfg : {testutil::table1(), testutil::lossless_table1(), testutil::table1(0.0)}) {
    const auto grid = default_grid(cfg.cavity());
    for (auto mc : all_cases(cfg.cavity().gamma0)) {
      for (auto fam : {QuadratureFamily::amplitude(), QuadratureFamily::phase()}) {
        for (auto disp : {PumpDispersion::Full, PumpDispersion::Constant}) {
          mc.family = fam;
          mc.dispersion = disp;
          if (fam.kind == QuadratureFamily::Kind::Phase && mc.combination != Combination::Subtracted)
            mc.combination = Combination::SumPort;
          seen[static_cast<int>(closed_form_for(mc, cfg))] = true;
          const auto a = assembled_spectrum(mc, cfg, grid);
          const auto c = closed_form_spectrum(mc, cfg, grid);
          double worst = 0.0;
          for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, rel(a.values[i], c.values[i]));
          CHECK(worst < 1e-10);
        }
      }
    }
  }
  for (bool s : seen) forms_seen += s;
  CHECK(forms_seen == 6);
}

TEST_CASE("general homodyne angle agrees on both paths") {
  const auto cfg = testutil::table1();
  const auto grid = log_grid(1e2, 1e6, 50);
  for (double phi : {0.2, 0.7, 1.3}) {
    for (auto comb : {Combination::DifferencePort, Combination::Subtracted}) {
      auto mc = testutil::make_case(TwoPhotonSqueezing{0.5 * cfg.cavity().gamma0}, comb,
                                    QuadratureFamily::general(phi));
      const auto a = assembled_spectrum(mc, cfg, grid);
      const auto c = closed_form_spectrum(mc, cfg, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rel(a.values[i], c.values[i]) < 1e-10);
    }
    auto mc = testutil::make_case(DegenerateSqueezing{0.5 * cfg.cavity().gamma0},
                                  Combination::DifferencePort, QuadratureFamily::general(phi));
    const auto a = assembled_spectrum(mc, cfg, grid);
    const auto c = closed_form_spectrum(mc, cfg, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rel(a.values[i], c.values[i]) < 1e-10);
  }
}

TEST_CASE("baseline reproduces the textbook form") {
  auto p = presets::table1();
  p.cavity.gamma_e = 0.0;
  p.mechanical.gamma_m = 0.0;
  p.mechanical.temperature = 0.0;
  const auto cfg = SystemConfig::create(p);
  const MeasurementCase mc;
  for (double w : {10.0, 1e3, 1e5}) {
    const double K = std::abs(mathcal_K(cfg.cavity(), cfg.K0(), 0, w));
    CHECK(rel(closed_form_psd(mc, cfg, w), w * w / K + K) < 1e-14);
    CHECK(rel(assemble_psd(signal_referenced(output_transfer(mc, cfg, w)), 0.0), w * w / K + K) < 1e-12);
  }
  const auto t = testutil::table1();
  const auto& m = t.mechanical();
  const double nT = t.derived().n_thermal;
  const double w = 5e3;
  auto lossless = testutil::lossless_table1();
  const double K = std::abs(mathcal_K(lossless.cavity(), lossless.K0(), 0, w));
  CHECK(rel(closed_form_psd(mc, lossless, w),
            2 * m.gamma_m * (2 * nT + 1) + (m.gamma_m * m.gamma_m + w * w) / K + K) < 1e-14);
}

TEST_CASE("reductions between closed forms") {
  const auto cfg = testutil::lossless_table1();
  for (double w : {1e2, 1e4, 1e6}) {
    const auto& c = cfg.cavity();
    const double gm = cfg.mechanical().gamma_m, nT = cfg.derived().n_thermal;
    const auto sub = nondegenerate_terms(c, gm, nT, cfg.K0(), 0.0, w, true, PumpDispersion::Full);
    const double K = std::abs(mathcal_K(c, cfg.K0(), 0, w));
    CHECK(rel(sub.total(), lossless_subtracted_terms(gm, nT, K, w).total()) < 1e-14);
    const auto raw = nondegenerate_terms(c, gm, nT, cfg.K0(), 0.0, w, false, PumpDispersion::Full);
    CHECK(rel(raw.total(), baseline_terms(gm, nT, K, w).total()) < 1e-14);
  }
}

TEST_CASE("two-photon versus degenerate back action at zero frequency") {
  const auto cfg = testutil::table1();
  const auto& c = cfg.cavity();
  const double expect = (c.gamma0 - c.gamma_e) / (c.gamma0 + c.gamma_e);
  for (double r : {0.0, 0.5, 0.9}) {
    const double k = r * c.gamma0;
    const double N0 = cfg.N0();
    const auto nd = nondegenerate_terms(c, 0.0, 0.0, N0, k, 0.0, false, PumpDispersion::Full);
    const auto dg = degenerate_terms(c, 0.0, 0.0, N0, k, 0.0, false, PumpDispersion::Full);
    CHECK(rel(nd.back_action / dg.back_action, expect) < 1e-8);
  }
  CHECK(std::abs(expect - 0.9934) < 1e-4);
}

TEST_CASE("two-photon subtraction never raises the spectrum") {
  for (auto cfg : {testutil::table1(), testutil::lossless_table1()}) {
    const auto grid = default_grid(cfg.cavity());
    const double g0 = cfg.cavity().gamma0;
    for (auto sq : {SqueezeConfig{NoSqueezing{}}, SqueezeConfig{TwoPhotonSqueezing{0.5 * g0}},
                    SqueezeConfig{TwoPhotonSqueezing{0.9 * g0}}}) {
      const auto raw = closed_form_spectrum(testutil::make_case(sq, Combination::DifferencePort), cfg, grid);
      const auto sub = closed_form_spectrum(testutil::make_case(sq, Combination::Subtracted), cfg, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) CHECK(sub.values[i] <= raw.values[i] * (1 + 1e-14));
    }
  }
}

TEST_CASE("degenerate subtraction with loss can exceed the raw port") {
  // The subtracted loss term goes as 1/|zeta|^2, and |zeta|^2 < ge/g0 near
  // Omega = 0 once upsilon approaches gamma0 - gamma_e.
  const auto cfg = testutil::table1();
  const double g0 = cfg.cavity().gamma0, w = 1e-3 * g0;
  const auto sq = DegenerateSqueezing{0.9 * g0};
  CHECK(closed_form_psd(testutil::make_case(sq, Combination::Subtracted), cfg, w) >
        closed_form_psd(testutil::make_case(sq, Combination::DifferencePort), cfg, w));
  const auto half = DegenerateSqueezing{0.5 * g0};
  CHECK(closed_form_psd(testutil::make_case(half, Combination::Subtracted), cfg, w) <
        closed_form_psd(testutil::make_case(half, Combination::DifferencePort), cfg, w));
}

TEST_CASE("baseline quantum noise never beats the SQL") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-3.0, 7.0);
  for (int i = 0; i < 2000; ++i) {
    const double K = std::pow(10.0, lg(rng)), w = std::pow(10.0, lg(rng)),
                 gm = std::pow(10.0, lg(rng) - 3);
    const auto t = baseline_terms(gm, 0.0, K, w);
    CHECK(t.measurement + t.back_action >= sql_psd(gm, w) * (1 - 1e-14));
  }
  CHECK(sql_psd(3.0, 0.0) == 6.0);
  CHECK(sql_psd(0.0, 4.0) == 8.0);
}

TEST_CASE("residual back action is linear in the loss ratio") {
  const double a = residual_back_action(3.7e4, 0.8, 1e-3);
  CHECK(rel(residual_back_action(3.7e4, 0.8, 2e-3), 2 * a) < 1e-12);
  // Rebalancing gamma0 and gamma_e at fixed gamma moves xi too; compare
  // against the term rebuilt from the coefficients.
  const double g = 2.25e5;
  for (double ge : {200.0, 400.0}) {
    const OpticalCavity c{g - ge, ge, 0.1, 1.2e15};
    const auto t = nondegenerate_terms(c, 0.0, 0.0, 1e5, 0.5 * c.gamma0, 1e4, true, PumpDispersion::Full);
    const double xmK = std::abs(xi_pm(c, 0.5 * c.gamma0, 1e4, Sign::Minus) *
                                mathcal_K(c, 1e5, 0.5 * c.gamma0, 1e4));
    const double xp = std::abs(xi_pm(c, 0.5 * c.gamma0, 1e4, Sign::Plus));
    CHECK(rel(t.back_action, xmK * (ge / c.gamma0) / (xp * xp)) < 1e-6);
  }
}

TEST_CASE("degenerate subtracted spectrum blows up at low frequency") {
  const auto cfg = testutil::table1();
  const double g0 = cfg.cavity().gamma0, w = 1e-3 * g0;
  const double s9 = closed_form_psd(testutil::make_case(DegenerateSqueezing{0.9 * g0}, Combination::Subtracted), cfg, w);
  const double s5 = closed_form_psd(testutil::make_case(DegenerateSqueezing{0.5 * g0}, Combination::Subtracted), cfg, w);
  CHECK(s9 > s5);
}

TEST_CASE("noise budget channels add up to the total") {
  const auto cfg = testutil::table1();
  const auto grid = default_grid(cfg.cavity());
  for (auto sq : {SqueezeConfig{TwoPhotonSqueezing{1e5}}, SqueezeConfig{DegenerateSqueezing{1e5}}}) {
    const auto b = noise_budget(testutil::make_case(sq, Combination::Subtracted), cfg, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double s = 0;
      for (const auto& ch : b.channels) s += ch.values[i];
      CHECK(rel(s, b.total.values[i]) < 1e-12);
      for (const auto& ch : b.channels) CHECK(ch.values[i] >= 0.0);
    }
  }
}

TEST_CASE("ratio to SQL") {
  auto p = presets::table1();
  p.cavity.gamma_e = 0.0;
  p.mechanical.gamma_m = 0.0;
  const auto cfg = SystemConfig::create(p);
  MeasurementCase mc;
  mc.dispersion = PumpDispersion::Constant;
  const double K = cfg.K0();
  const auto r = ratio_to_sql(closed_form_spectrum(mc, cfg, log_grid(0.5 * K, 2 * K, 2001)), 0.0);
  const auto it = std::min_element(r.values.begin(), r.values.end());
  CHECK(std::abs(*it - 1.0) < 1e-6);
  CHECK(rel(r.omega[it - r.values.begin()], K) < 1e-3);

  const auto t = testutil::table1(0.0);
  const auto r9 = ratio_to_sql(
      closed_form_spectrum(testutil::make_case(TwoPhotonSqueezing{0.9 * t.cavity().gamma0}, Combination::DifferencePort),
                           t, default_grid(t.cavity())), 0.0);
  CHECK(*std::min_element(r9.values.begin(), r9.values.end()) < 1.0);
}

TEST_CASE("spectral detection threshold") {
  CHECK(rel(detection_threshold_spectral(4.0, 0.25), std::sqrt(4.0 / 0.25)) < 1e-15);
  CHECK_THROWS_AS(detection_threshold_spectral(1.0, 0.0), ConfigError);
  const auto cfg = testutil::table1();
  const auto s = closed_form_spectrum(
      testutil::make_case(TwoPhotonSqueezing{0.9 * cfg.cavity().gamma0}, Combination::Subtracted), cfg,
      default_grid(cfg.cavity()));
  const double f = detection_threshold_spectral(s, 28e-6, s.omega[0]);
  CHECK(rel(f, std::sqrt(s.values[0] / 28e-6)) < 1e-12);
  CHECK_THROWS_AS(detection_threshold_spectral(s, 28e-6, 1e12), ConfigError);
}

TEST_CASE("time-domain threshold variants") {
  MechanicalOscillator m{1e-10, 2e6, 0.0, 0.0};
  const double tau = 28e-6;
  const auto t = detection_threshold_time_domain(m, tau);
  CHECK(rel(t.band_quantum_term / t.sql_quantum_term, 1 / std::sqrt(3.0)) < 1e-12);
  CHECK(rel(t.optimal_K, 2 * constants::pi / tau / std::sqrt(3.0)) < 1e-12);
  const auto cfg = testutil::table1();
  const auto tt = detection_threshold_time_domain(cfg.mechanical(), 28e-6);
  CHECK(rel(tt.force_sql, 2.071779929887536e-14) < 1e-12);
  CHECK(tt.short_pulse);
  CHECK(tt.force_band > 0.0);
}

TEST_CASE("grids and errors") {
  const auto g = log_grid(1.0, 100.0, 3);
  CHECK(rel(g[1], 10.0) < 1e-15);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 10), ConfigError);
  CHECK_THROWS_AS(log_grid(1.0, 10.0, 1), ConfigError);
  const auto cfg = testutil::table1();
  CHECK(default_grid(cfg.cavity()).size() == 400);
  CHECK_THROWS_AS(closed_form_psd(testutil::make_case(NoSqueezing{}, Combination::SumPort), cfg, 1e3), ConfigError);
}

}
