#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trimode/spectra.hpp"
#include "trimode/transfer.hpp"

namespace trimode {

/// Real linear SDE for one quadrature family:
///   dx = A x dt + B dW + b_f f(t) dt,   x = (g_plus, g_minus, d)
///   y_port = C_port x + D_port dW/dt
/// dW are the increments of (alpha+, alpha-, eps+, eps-, q), each a real
/// white noise with double-sided PSD 1/2 (single-sided PSD 1).
struct SdeSystem {
  static constexpr int kState = 3;
  static constexpr int kInputs = 5;
  using StateMatrix = Eigen::Matrix<double, kState, kState>;
  using InputMatrix = Eigen::Matrix<double, kState, kInputs>;
  using OutputMatrix = Eigen::Matrix<double, 2, kState>;
  using FeedMatrix = Eigen::Matrix<double, 2, kInputs>;

  Quadrature quadrature = Quadrature::Amplitude;
  StateMatrix drift = StateMatrix::Zero();
  InputMatrix noise = InputMatrix::Zero();
  Eigen::Vector3d signal_input = Eigen::Vector3d::Zero();
  /// Row 0: beta_plus, row 1: beta_minus.
  OutputMatrix output_state = OutputMatrix::Zero();
  FeedMatrix output_feed = FeedMatrix::Zero();

  /// Builds the quadrature Langevin system for `squeeze`. Throws
  /// StabilityError when a drift eigenvalue has positive real part.
  static SdeSystem build(const SystemConfig& config,
                         const SqueezeConfig& squeeze, Quadrature quadrature);

  /// Multiplies each input's column (state and feed-through) by gains[i].
  void scale_inputs(const std::array<double, kInputs>& gains);

  /// Largest |Re lambda| of the drift together with the input rates.
  double largest_rate() const;
  /// Slowest nonzero optical decay rate.
  double slowest_optical_rate() const;

  /// Row of port outputs for which `port` is the mechanical one.
  int mechanical_row() const { return quadrature == Quadrature::Amplitude ? 1 : 0; }
};

enum class Integrator { Exact, EulerMaruyama };

struct SimulationOptions {
  double duration = 0.0;     // s, recorded span after burn-in
  double dt = 0.0;           // s; 0 picks 0.05 / largest rate
  double burn_in = -1.0;     // s; negative picks 20 / slowest optical rate
  std::uint64_t seed = 0;
  std::uint32_t trial = 0;
  Integrator integrator = Integrator::Exact;
  std::array<double, SdeSystem::kInputs> input_gains{1, 1, 1, 1, 1};
  bool record_state = false;
  /// Deterministic force f(t) (normalized units, zero-order hold).
  std::function<double(double)> signal;
};

/// Output samples of both ports. For a general-angle family each port is
/// cos(phi) * amplitude port + sin(phi) * phase port, per the transfer
/// module's pairing.
struct OutputSeries {
  double dt = 0.0;
  std::vector<double> mechanical;  // port carrying the signal
  std::vector<double> open;        // the other port
  /// Row-major (g+, g-, d) per step for the amplitude system (or the phase
  /// system for the phase family) when recorded.
  std::vector<double> state;
};

/// Integrates the quadrature equations of `family` under `squeeze`
/// (defaults to the config's squeezing).
OutputSeries simulate(const SystemConfig& config, const QuadratureFamily& family,
                      const SimulationOptions& options);
OutputSeries simulate(const SystemConfig& config, const SqueezeConfig& squeeze,
                      const QuadratureFamily& family,
                      const SimulationOptions& options);

struct OracleEstimate {
  std::vector<double> grid;    // rad/s
  std::vector<double> psd;
  std::vector<double> stderr_;  // per-point standard error of the mean
  std::size_t segments = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

enum class Window { Hann, Rectangular };

/// Complex gain applied to the open port before adding it to the
/// mechanical port (physics convention, x(Omega) = int x(t) e^{i Omega t}).
using PortFilter = std::function<cplx(double)>;

/// Welch estimate over non-overlapping segments of `segment_length` samples
/// of `series`. Requires at least 32 segments. Returns all bins 1..N/2-1.
OracleEstimate estimate_psd(const std::vector<double>& series, double dt,
                            std::size_t segment_length,
                            Window window = Window::Hann);
/// Same, for mechanical + filter * open.
OracleEstimate estimate_psd(const OutputSeries& series,
                            std::size_t segment_length, Window window,
                            const PortFilter& open_filter);

struct ValidationOptions {
  std::size_t segments = 200;
  std::uint64_t seed = 1;
  double tolerance = 0.05;
  double pass_fraction = 0.95;
  /// Lowest grid frequency in units of gamma0; sets the segment length.
  double omega_lo_g0 = 1e-2;
  double omega_hi_g0 = 10.0;
  std::size_t grid_points = 80;
  /// Extra two-photon kappa (units of gamma0) applied to the simulation only.
  double perturb_kappa_g0 = 0.0;
  double dt = 0.0;
};

struct ValidationPoint {
  double omega = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double expected = 0.0;
  bool agrees = false;
};

struct ValidationReport {
  std::string case_label;
  MeasurementCase mcase;
  std::vector<ValidationPoint> points;
  double agree_fraction = 0.0;
  bool passed = false;
  std::size_t segments = 0;
  std::size_t segment_length = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double perturb_kappa_g0 = 0.0;
  double tolerance = 0.0;
};

struct SegmentPlan {
  std::size_t length = 0;  // samples per segment
  double dt = 0.0;
};
/// Segment length and step used by validate: the lowest compared frequency
/// sits near FFT bin 10.
SegmentPlan plan_segments(const SystemConfig& config,
                          const MeasurementCase& mcase,
                          const ValidationOptions& options);

/// Simulates the case, forms the signal-referred spectrum using the
/// analytic signal coefficient, and compares it with closed_form_psd.
ValidationReport validate(const SystemConfig& config,
                          const MeasurementCase& mcase,
                          const ValidationOptions& options);

/// Frequency response of the SDE itself, H = C (-i Omega - A)^{-1} B + D,
/// rows (beta_plus, beta_minus), columns the five inputs plus the signal.
Eigen::Matrix<cplx, 2, 6> state_space_response(const SdeSystem& sys,
                                               double omega);
/// Signal-referred PSD implied by the SDE for a case, evaluated without
/// simulation. The signal reference is the analytic transfer coefficient.
double state_space_psd(const SystemConfig& config, const MeasurementCase& mcase,
                       double omega);

/// Stationary covariance P solving A P + P A^T + B B^T / 2 = 0.
Eigen::Matrix3d stationary_covariance(const SdeSystem& sys);

/// Maps a simulation step to the FFT bin closest to each requested
/// frequency, returning unique bin indices in ascending order.
std::vector<std::size_t> select_bins(std::size_t segment_length, double dt,
                                     const std::vector<double>& omegas);

}  // namespace trimode
