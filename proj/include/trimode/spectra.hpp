#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "trimode/model.hpp"
#include "trimode/transfer.hpp"

namespace trimode {

/// Closed-form spectral density families.
enum class ClosedForm {
  Baseline,                  // no squeezing, no loss, raw
  LosslessSubtracted,        // no squeezing, no loss, subtracted
  NondegenerateRaw,          // two-photon squeezing with loss, raw
  NondegenerateSubtracted,   // two-photon squeezing with loss, subtracted
  DegenerateRaw,             // degenerate squeezing with loss, raw
  DegenerateSubtracted,      // degenerate squeezing with loss, subtracted
};
std::string closed_form_name(ClosedForm form);

struct SpectrumSeries {
  MeasurementCase mcase;
  std::vector<double> omega;   // rad/s
  std::vector<double> values;  // normalized force PSD (single-sided)
  std::string quantity = "psd";
  std::string method;          // "assembled" or closed-form name
  SystemParameters config;
};

struct NoiseBudget {
  std::array<SpectrumSeries, kNoiseChannels.size()> channels;
  SpectrumSeries total;
};

/// Thermal, measurement (shot) and back-action parts of a closed form.
struct ClosedFormTerms {
  double thermal = 0.0;
  double measurement = 0.0;
  double back_action = 0.0;
  double total() const { return thermal + measurement + back_action; }
};

/// Sum over channels of |c|^2 S_c; vacuum channels have S_c = 1 and the
/// thermal channel S_c = 2 n_T + 1. The vector must be signal-referenced.
double assemble_psd(const TransferVector& referenced, double n_thermal);
std::array<double, kNoiseChannels.size()> channel_contributions(
    const TransferVector& referenced, double n_thermal);

// Individual closed forms (K, N evaluated by the caller's dispersion mode).
ClosedFormTerms baseline_terms(double gamma_m, double n_thermal,
                               double K_modulus, double omega);
ClosedFormTerms lossless_subtracted_terms(double gamma_m, double n_thermal,
                                          double K_modulus, double omega);
ClosedFormTerms nondegenerate_terms(const OpticalCavity& cavity,
                                    double gamma_m, double n_thermal,
                                    double K0, double kappa, double omega,
                                    bool subtracted,
                                    PumpDispersion dispersion);
ClosedFormTerms degenerate_terms(const OpticalCavity& cavity, double gamma_m,
                                 double n_thermal, double N0, double upsilon,
                                 double omega, bool subtracted,
                                 PumpDispersion dispersion);
/// Residual back action of the subtracted two-photon spectrum.
double residual_back_action(double xi_minus_K_modulus, double xi_plus_modulus,
                            double loss_ratio);

ClosedForm closed_form_for(const MeasurementCase& mcase,
                           const SystemConfig& config);
ClosedFormTerms closed_form_terms(const MeasurementCase& mcase,
                                  const SystemConfig& config, double omega);
double closed_form_psd(const MeasurementCase& mcase,
                       const SystemConfig& config, double omega);

/// S_SQL = 2 sqrt(gamma_m^2 + Omega^2).
double sql_psd(double gamma_m, double omega);

std::vector<double> log_grid(double lo, double hi, std::size_t points);
/// 400 log-spaced points over [1e-3 gamma0, 10 gamma0].
std::vector<double> default_grid(const OpticalCavity& cavity);

/// Signal-referenced spectrum via transfer vectors.
SpectrumSeries assembled_spectrum(const MeasurementCase& mcase,
                                  const SystemConfig& config,
                                  const std::vector<double>& grid);
SpectrumSeries closed_form_spectrum(const MeasurementCase& mcase,
                                    const SystemConfig& config,
                                    const std::vector<double>& grid);
NoiseBudget noise_budget(const MeasurementCase& mcase,
                         const SystemConfig& config,
                         const std::vector<double>& grid);

/// Pointwise S / S_SQL; points where S_SQL = 0 are dropped.
SpectrumSeries ratio_to_sql(const SpectrumSeries& series, double gamma_m);

/// f_s0 = sqrt(S * dOmega / 2pi) with dOmega = 2 pi / tau.
double detection_threshold_spectral(double psd_value, double tau);
/// Same, with S linearly interpolated from the series at omega.
double detection_threshold_spectral(const SpectrumSeries& series, double tau,
                                    double omega);

struct TimeDomainThreshold {
  double optimal_K = 0.0;           // rad/s
  double thermal_term = 0.0;        // 2 gm (2 nT + 1) / tau
  double band_quantum_term = 0.0;   // (gm^2 + (2pi/tau)^2/3)/K* + K*, over tau
  double sql_quantum_term = 0.0;    // 4 pi / tau^2
  double force_band = 0.0;          // N
  double force_sql_form = 0.0;      // N
  double force_sql = 0.0;           // N, (4/tau) sqrt(pi hbar m wm / sqrt 3)
  bool short_pulse = true;          // gamma_m tau << 1
};
TimeDomainThreshold detection_threshold_time_domain(
    const MechanicalOscillator& mech, double tau);

}  // namespace trimode
