#include "trimode/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace trimode {

namespace {

using constants::pi;

constexpr cplx I{0.0, 1.0};

double thermal_psd(double gamma_m, double n_thermal) {
  return 2.0 * gamma_m * (2.0 * n_thermal + 1.0);
}

bool is_subtracted(const MeasurementCase& mcase) {
  return mcase.combination == Combination::Subtracted;
}

// Signal response of a pure quadrature port, for composing general angles.
cplx pure_signal_gain(const MeasurementCase& mcase, const SystemConfig& config,
                      Quadrature quadrature, double omega) {
  const auto& cav = config.cavity();
  const cplx mech_pole{config.mechanical().gamma_m, -omega};
  const double pump_omega =
      mcase.dispersion == PumpDispersion::Full ? omega : 0.0;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&mcase.squeeze)) {
    const double ups =
        quadrature == Quadrature::Amplitude ? dg->upsilon : -dg->upsilon;
    const cplx N = degenerate_coeffs(cav, config.N0(), ups, pump_omega).mathcal_N;
    return -std::sqrt(N) / mech_pole;
  }
  const double kappa = squeeze_rate(mcase.squeeze);
  const cplx xmK = xi_pm(cav, kappa, omega, Sign::Minus) *
                   mathcal_K(cav, config.K0(), kappa, pump_omega);
  return -std::sqrt(xmK) / mech_pole;
}

ClosedFormTerms pure_terms(const MeasurementCase& mcase,
                           const SystemConfig& config, Quadrature quadrature,
                           double omega) {
  const auto& cav = config.cavity();
  const double gm = config.mechanical().gamma_m;
  const double nT = config.derived().n_thermal;
  const bool sub = is_subtracted(mcase);
  const double pump_omega =
      mcase.dispersion == PumpDispersion::Full ? omega : 0.0;

  switch (closed_form_for(mcase, config)) {
    case ClosedForm::Baseline:
      return baseline_terms(gm, nT,
                            std::abs(mathcal_K(cav, config.K0(), 0.0, pump_omega)),
                            omega);
    case ClosedForm::LosslessSubtracted:
      return lossless_subtracted_terms(
          gm, nT, std::abs(mathcal_K(cav, config.K0(), 0.0, pump_omega)),
          omega);
    case ClosedForm::NondegenerateRaw:
    case ClosedForm::NondegenerateSubtracted:
      return nondegenerate_terms(cav, gm, nT, config.K0(),
                                 squeeze_rate(mcase.squeeze), omega, sub,
                                 mcase.dispersion);
    case ClosedForm::DegenerateRaw:
    case ClosedForm::DegenerateSubtracted: {
      const double ups = squeeze_rate(mcase.squeeze);
      return degenerate_terms(cav, gm, nT, config.N0(),
                              quadrature == Quadrature::Amplitude ? ups : -ups,
                              omega, sub, mcase.dispersion);
    }
  }
  return {};
}

}  // namespace

std::string closed_form_name(ClosedForm form) {
  switch (form) {
    case ClosedForm::Baseline: return "baseline";
    case ClosedForm::LosslessSubtracted: return "lossless_subtracted";
    case ClosedForm::NondegenerateRaw: return "nondegenerate_raw";
    case ClosedForm::NondegenerateSubtracted: return "nondegenerate_subtracted";
    case ClosedForm::DegenerateRaw: return "degenerate_raw";
    case ClosedForm::DegenerateSubtracted: return "degenerate_subtracted";
  }
  return "unknown";
}

std::array<double, kNoiseChannels.size()> channel_contributions(
    const TransferVector& tv, double n_thermal) {
  if (!tv.referenced)
    throw ConfigError("assemble_psd needs a signal-referenced transfer vector");
  std::array<double, kNoiseChannels.size()> out{};
  for (std::size_t i = 0; i < kNoiseChannels.size(); ++i) {
    const NoiseChannel ch = kNoiseChannels[i];
    const double weight =
        ch == NoiseChannel::Thermal ? 2.0 * n_thermal + 1.0 : 1.0;
    for (int q = 0; q < 2; ++q)
      out[i] += std::norm(tv.at(static_cast<Quadrature>(q), ch)) * weight;
  }
  return out;
}

double assemble_psd(const TransferVector& tv, double n_thermal) {
  const auto parts = channel_contributions(tv, n_thermal);
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

ClosedFormTerms baseline_terms(double gamma_m, double n_thermal,
                               double K_modulus, double omega) {
  return {thermal_psd(gamma_m, n_thermal),
          (gamma_m * gamma_m + omega * omega) / K_modulus, K_modulus};
}

ClosedFormTerms lossless_subtracted_terms(double gamma_m, double n_thermal,
                                          double K_modulus, double omega) {
  return {thermal_psd(gamma_m, n_thermal),
          (gamma_m * gamma_m + omega * omega) / K_modulus, 0.0};
}

double residual_back_action(double xi_minus_K_modulus, double xi_plus_modulus,
                            double loss_ratio) {
  return xi_minus_K_modulus * loss_ratio / (xi_plus_modulus * xi_plus_modulus);
}

ClosedFormTerms nondegenerate_terms(const OpticalCavity& cav, double gamma_m,
                                    double n_thermal, double K0, double kappa,
                                    double omega, bool subtracted,
                                    PumpDispersion dispersion) {
  const double pump_omega = dispersion == PumpDispersion::Full ? omega : 0.0;
  const double K = std::abs(mathcal_K(cav, K0, kappa, pump_omega));
  const double xm = std::abs(xi_pm(cav, kappa, omega, Sign::Minus));
  const double mm = std::abs(mu_pm(cav, kappa, omega, Sign::Minus));
  const double loss_ratio = cav.gamma_e / cav.gamma0;

  ClosedFormTerms t;
  t.thermal = thermal_psd(gamma_m, n_thermal);
  t.measurement =
      (gamma_m * gamma_m + omega * omega) / K * (xm + mm * mm / xm);
  if (subtracted) {
    const double xp = std::abs(xi_pm(cav, kappa, omega, Sign::Plus));
    t.back_action = residual_back_action(xm * K, xp, loss_ratio);
  } else {
    t.back_action = xm * K * (1.0 + loss_ratio);
  }
  return t;
}

ClosedFormTerms degenerate_terms(const OpticalCavity& cav, double gamma_m,
                                 double n_thermal, double N0, double upsilon,
                                 double omega, bool subtracted,
                                 PumpDispersion dispersion) {
  const auto c = degenerate_coeffs(cav, N0, upsilon, omega);
  const double N =
      dispersion == PumpDispersion::Full
          ? std::abs(c.mathcal_N)
          : std::abs(degenerate_coeffs(cav, N0, upsilon, 0.0).mathcal_N);
  const double loss_ratio = cav.gamma_e / cav.gamma0;
  const double z2 = std::norm(c.zeta);

  ClosedFormTerms t;
  t.thermal = thermal_psd(gamma_m, n_thermal);
  t.measurement = (gamma_m * gamma_m + omega * omega) / N *
                  (z2 + std::norm(c.sigma) * loss_ratio);
  t.back_action = subtracted ? N / z2 * loss_ratio : N * (1.0 + loss_ratio);
  return t;
}

ClosedForm closed_form_for(const MeasurementCase& mcase,
                           const SystemConfig& config) {
  const bool sub = is_subtracted(mcase);
  if (std::holds_alternative<DegenerateSqueezing>(mcase.squeeze))
    return sub ? ClosedForm::DegenerateSubtracted : ClosedForm::DegenerateRaw;
  if (std::holds_alternative<NoSqueezing>(mcase.squeeze) &&
      config.cavity().gamma_e == 0.0)
    return sub ? ClosedForm::LosslessSubtracted : ClosedForm::Baseline;
  return sub ? ClosedForm::NondegenerateSubtracted
             : ClosedForm::NondegenerateRaw;
}

ClosedFormTerms closed_form_terms(const MeasurementCase& mcase,
                                  const SystemConfig& config, double omega) {
  check_case(mcase, config);
  if (mcase.combination != Combination::Subtracted &&
      mcase.combination != mcase.signal_port())
    throw ConfigError("requested port carries no mechanical signal");
  if (config.mechanical().gamma_m == 0.0 && omega == 0.0)
    throw ConfigError("spectrum undefined at Omega = 0 with gamma_m = 0");

  const auto w = mcase.family.weights();
  if (w[1] == 0.0) return pure_terms(mcase, config, Quadrature::Amplitude, omega);
  if (w[0] == 0.0) return pure_terms(mcase, config, Quadrature::Phase, omega);

  if (is_subtracted(mcase)) (void)subtraction_filter(mcase, config, omega);
  // General angle: amplitude and phase noises add incoherently; the signal
  // along the homodyne angle picks up cos^2 s_a + sin^2 s_p.
  const auto ta = pure_terms(mcase, config, Quadrature::Amplitude, omega);
  const auto tp = pure_terms(mcase, config, Quadrature::Phase, omega);
  const cplx sa = pure_signal_gain(mcase, config, Quadrature::Amplitude, omega);
  const cplx sp = pure_signal_gain(mcase, config, Quadrature::Phase, omega);
  const double wa = w[0] * w[0] * std::norm(sa);
  const double wp = w[1] * w[1] * std::norm(sp);
  const double norm = std::norm(w[0] * w[0] * sa + w[1] * w[1] * sp);
  return {(wa * ta.thermal + wp * tp.thermal) / norm,
          (wa * ta.measurement + wp * tp.measurement) / norm,
          (wa * ta.back_action + wp * tp.back_action) / norm};
}

double closed_form_psd(const MeasurementCase& mcase,
                       const SystemConfig& config, double omega) {
  return closed_form_terms(mcase, config, omega).total();
}

double sql_psd(double gamma_m, double omega) {
  return 2.0 * std::hypot(gamma_m, omega);
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2)
    throw ConfigError("log grid needs 0 < lo < hi and at least 2 points");
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

std::vector<double> default_grid(const OpticalCavity& cavity) {
  return log_grid(1e-3 * cavity.gamma0, 10.0 * cavity.gamma0, 400);
}

SpectrumSeries assembled_spectrum(const MeasurementCase& mcase,
                                  const SystemConfig& config,
                                  const std::vector<double>& grid) {
  SpectrumSeries s{mcase, grid, {}, "psd", "assembled", config.parameters()};
  s.values.reserve(grid.size());
  const double nT = config.derived().n_thermal;
  for (double om : grid) {
    const auto tv = signal_referenced(output_transfer(mcase, config, om));
    s.values.push_back(assemble_psd(tv, nT));
  }
  return s;
}

SpectrumSeries closed_form_spectrum(const MeasurementCase& mcase,
                                    const SystemConfig& config,
                                    const std::vector<double>& grid) {
  SpectrumSeries s{mcase, grid, {}, "psd",
                   closed_form_name(closed_form_for(mcase, config)),
                   config.parameters()};
  s.values.reserve(grid.size());
  for (double om : grid) s.values.push_back(closed_form_psd(mcase, config, om));
  return s;
}

NoiseBudget noise_budget(const MeasurementCase& mcase,
                         const SystemConfig& config,
                         const std::vector<double>& grid) {
  NoiseBudget b;
  for (std::size_t i = 0; i < kNoiseChannels.size(); ++i) {
    b.channels[i] = SpectrumSeries{mcase, grid, {},
                                   std::string(channel_name(kNoiseChannels[i])),
                                   "assembled", config.parameters()};
    b.channels[i].values.reserve(grid.size());
  }
  b.total = assembled_spectrum(mcase, config, grid);
  const double nT = config.derived().n_thermal;
  for (double om : grid) {
    const auto tv = signal_referenced(output_transfer(mcase, config, om));
    const auto parts = channel_contributions(tv, nT);
    for (std::size_t i = 0; i < parts.size(); ++i)
      b.channels[i].values.push_back(parts[i]);
  }
  return b;
}

SpectrumSeries ratio_to_sql(const SpectrumSeries& series, double gamma_m) {
  SpectrumSeries r = series;
  r.quantity = "ratio_to_sql";
  r.omega.clear();
  r.values.clear();
  for (std::size_t i = 0; i < series.omega.size(); ++i) {
    const double sql = sql_psd(gamma_m, series.omega[i]);
    if (sql == 0.0) continue;
    r.omega.push_back(series.omega[i]);
    r.values.push_back(series.values[i] / sql);
  }
  return r;
}

double detection_threshold_spectral(double psd_value, double tau) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double bandwidth = 2.0 * pi / tau;
  return std::sqrt(psd_value * bandwidth / (2.0 * pi));
}

double detection_threshold_spectral(const SpectrumSeries& series, double tau,
                                    double omega) {
  const auto& x = series.omega;
  if (x.empty() || omega < x.front() || omega > x.back())
    throw ConfigError("threshold frequency outside the spectrum grid");
  auto it = std::lower_bound(x.begin(), x.end(), omega);
  std::size_t j = static_cast<std::size_t>(it - x.begin());
  if (j == 0) return detection_threshold_spectral(series.values.front(), tau);
  const double t = (omega - x[j - 1]) / (x[j] - x[j - 1]);
  const double s = series.values[j - 1] + t * (series.values[j] - series.values[j - 1]);
  return detection_threshold_spectral(s, tau);
}

TimeDomainThreshold detection_threshold_time_domain(
    const MechanicalOscillator& mech, double tau) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double nT = thermal_occupancy(mech.omega_m, mech.temperature);
  const double gm = mech.gamma_m;
  const double band = 2.0 * pi / tau;

  TimeDomainThreshold t;
  t.short_pulse = gm * tau < 0.1;
  t.optimal_K = std::sqrt(gm * gm + band * band / 3.0);
  t.thermal_term = thermal_psd(gm, nT) / tau;
  t.band_quantum_term =
      ((gm * gm + band * band / 3.0) / t.optimal_K + t.optimal_K) / tau;
  t.sql_quantum_term = 4.0 * pi / (tau * tau);
  const double scale = 4.0 * constants::hbar * mech.mass * mech.omega_m;
  t.force_band = std::sqrt(scale * (t.thermal_term + t.band_quantum_term));
  t.force_sql_form = std::sqrt(scale * (t.thermal_term + t.sql_quantum_term));
  t.force_sql = 4.0 / tau *
                std::sqrt(pi * constants::hbar * mech.mass * mech.omega_m /
                          std::sqrt(3.0));
  return t;
}

}  // namespace trimode
