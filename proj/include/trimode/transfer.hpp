#pragma once

#include <array>
#include <complex>
#include <string>
#include <string_view>

#include "trimode/model.hpp"

namespace trimode {

using cplx = std::complex<double>;

enum class NoiseChannel : int {
  AlphaPlus = 0,
  AlphaMinus,
  EpsPlus,
  EpsMinus,
  Thermal,
  Signal,
};
inline constexpr int kChannelCount = 6;
inline constexpr std::array<NoiseChannel, 5> kNoiseChannels = {
    NoiseChannel::AlphaPlus, NoiseChannel::AlphaMinus, NoiseChannel::EpsPlus,
    NoiseChannel::EpsMinus, NoiseChannel::Thermal};

std::string_view channel_name(NoiseChannel channel);

/// Which optical quadrature of the inputs a coefficient acts on.
enum class Quadrature : int { Amplitude = 0, Phase = 1 };

struct QuadratureFamily {
  enum class Kind { Amplitude, Phase, General };
  Kind kind = Kind::Amplitude;
  double angle = 0.0;  // rad, used by General

  static QuadratureFamily amplitude() { return {Kind::Amplitude, 0.0}; }
  static QuadratureFamily phase() { return {Kind::Phase, 0.0}; }
  static QuadratureFamily general(double phi) { return {Kind::General, phi}; }

  /// Weights (cos phi, sin phi) of amplitude and phase parts.
  std::array<double, 2> weights() const;
  std::string name() const;
};

enum class Combination { SumPort, DifferencePort, Subtracted };
std::string_view combination_name(Combination combination);

/// Full-dispersion pump K(Omega), or K frozen at its Omega = 0 value.
enum class PumpDispersion { Full, Constant };

struct MeasurementCase {
  SqueezeConfig squeeze = NoSqueezing{};
  QuadratureFamily family = QuadratureFamily::amplitude();
  Combination combination = Combination::DifferencePort;
  PumpDispersion dispersion = PumpDispersion::Full;

  /// Port carrying the mechanical signal: difference for amplitude and
  /// general-angle families, sum for the phase family.
  Combination signal_port() const;
};

using Coefficients = std::array<cplx, kChannelCount>;

struct TransferVector {
  double omega = 0.0;
  std::array<Coefficients, 2> coeffs{};  // indexed by Quadrature
  /// Direction of the reference signal in (amplitude, phase) space.
  std::array<double, 2> signal_direction{1.0, 0.0};
  bool referenced = false;

  cplx& at(Quadrature q, NoiseChannel c) {
    return coeffs[static_cast<int>(q)][static_cast<int>(c)];
  }
  cplx at(Quadrature q, NoiseChannel c) const {
    return coeffs[static_cast<int>(q)][static_cast<int>(c)];
  }
  /// Output response to a unit signal force along signal_direction.
  cplx signal_gain() const;
  /// Largest coefficient modulus across all entries.
  double max_modulus() const;
};

enum class Sign { Plus, Minus };

// Two-photon coefficients (kappa = 0 for no squeezing).
cplx xi_pm(const OpticalCavity& cavity, double kappa, double omega, Sign sign);
cplx mu_pm(const OpticalCavity& cavity, double kappa, double omega, Sign sign);
cplx mathcal_K(const OpticalCavity& cavity, double K0, double kappa,
               double omega);

struct DegenerateCoefficients {
  cplx zeta;
  cplx sigma;
  cplx mathcal_N;
};
/// Pass -upsilon for the phase family (antisqueezed direction).
DegenerateCoefficients degenerate_coeffs(const OpticalCavity& cavity,
                                         double N0, double upsilon,
                                         double omega);

/// Raw (unreferenced) output coefficients for the requested port.
TransferVector output_transfer(const MeasurementCase& mcase,
                               const SystemConfig& config, double omega);

/// Complex post-processing gain h applied to the non-mechanical port so
/// that mechanical + h * non_mechanical cancels the AlphaPlus (amplitude)
/// or AlphaMinus (phase) back-action vacuum.
cplx subtraction_filter(const MeasurementCase& mcase,
                        const SystemConfig& config, double omega);

/// Back-action-subtracted combination of the two ports.
TransferVector subtracted_transfer(const MeasurementCase& mcase,
                                   const SystemConfig& config, double omega);

/// Divides every coefficient by the signal gain; throws when it is zero.
TransferVector signal_referenced(const TransferVector& tv);

/// Throws StabilityError if the case's squeezing is unstable for the cavity.
void check_case(const MeasurementCase& mcase, const SystemConfig& config);

}  // namespace trimode
