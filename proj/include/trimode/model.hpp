#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace trimode {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double speed_of_light = 2.99792458e8;  // m/s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

/// Raised for malformed or out-of-domain parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the linearized dynamics would be unstable.
class StabilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct MechanicalOscillator {
  double mass = 0.0;         // kg
  double omega_m = 0.0;      // rad/s
  double gamma_m = 0.0;      // rad/s, half-linewidth
  double temperature = 0.0;  // K

  static MechanicalOscillator from_quality_factor(double mass, double omega_m,
                                                  double quality_factor,
                                                  double temperature);

  /// Q = omega_m / (2 gamma_m); infinite for a lossless oscillator.
  double quality_factor() const;
  void check() const;
};

struct OpticalCavity {
  double gamma0 = 0.0;   // rad/s, input coupler half-rate
  double gamma_e = 0.0;  // rad/s, loss half-rate
  double length = 0.0;   // m
  double omega0 = 0.0;   // rad/s, carrier

  static OpticalCavity from_wavelength(double gamma0, double gamma_e,
                                       double length, double wavelength);
  /// Rates from mirror power transmittance T^2 and round-trip loss eps^2.
  static OpticalCavity from_mirrors(double power_transmittance,
                                    double power_loss, double length,
                                    double wavelength);

  double gamma() const { return gamma0 + gamma_e; }
  double wavelength() const;
  void check() const;
};

struct NoSqueezing {};
struct TwoPhotonSqueezing {
  double kappa = 0.0;  // rad/s
};
struct DegenerateSqueezing {
  double upsilon = 0.0;  // rad/s
};
using SqueezeConfig =
    std::variant<NoSqueezing, TwoPhotonSqueezing, DegenerateSqueezing>;

std::string squeeze_name(const SqueezeConfig& squeeze);
/// Parametric rate kappa (two-photon) or upsilon (degenerate); 0 otherwise.
double squeeze_rate(const SqueezeConfig& squeeze);

struct DriveConfig {
  enum class Kind { DimensionlessPump, InputPower };
  Kind kind = Kind::DimensionlessPump;
  double value = 0.0;  // K0 in rad/s, or P_in in W

  static DriveConfig pump(double K0) { return {Kind::DimensionlessPump, K0}; }
  static DriveConfig power(double watts) { return {Kind::InputPower, watts}; }
};

struct SignalPulse {
  double amplitude_F_s0 = 0.0;  // N; zero when only tau matters
  double duration_tau = 0.0;    // s
  double phase_psi_f = 0.0;     // rad

  /// f_s0 = F_s0 / sqrt(2 hbar omega_m m).
  double normalized_amplitude(const MechanicalOscillator& mech) const;
  /// f_s = f_s0 / 2.
  double normalized_quadrature_amplitude(
      const MechanicalOscillator& mech) const;
};

/// Plain parameter bundle, validated and frozen by SystemConfig::create.
struct SystemParameters {
  MechanicalOscillator mechanical;
  OpticalCavity cavity;
  DriveConfig drive;
  SqueezeConfig squeeze = NoSqueezing{};
  SignalPulse signal;
};

struct DerivedQuantities {
  double x0 = 0.0;               // m, zero-point amplitude
  double n_thermal = 0.0;        // thermal phonon number
  double braginsky = 0.0;        // n_T omega_m tau / Q
  double eta = 0.0;              // rad/s, x0 omega0 / L
  double C0_squared = 0.0;       // mean intracavity photon-flux amplitude^2
  double K0 = 0.0;               // rad/s
  double input_power = 0.0;      // W
  double quality_factor = 0.0;
};

struct RegimeWarning {
  std::string condition;
  double ratio = 0.0;
  std::string message;
};

double thermal_occupancy(double omega_m, double temperature);
double braginsky_factor(double n_thermal, double omega_m, double tau,
                        double quality_factor);
double dimensionless_power(const OpticalCavity& cavity,
                           const MechanicalOscillator& mech,
                           double input_power);
double power_for_K0(const OpticalCavity& cavity,
                    const MechanicalOscillator& mech, double K0);

/// Regime warnings; throws StabilityError when the squeezing bound fails.
std::vector<RegimeWarning> validate_regime(const SystemParameters& params);

class SystemConfig {
 public:
  static SystemConfig create(const SystemParameters& params);

  const SystemParameters& parameters() const { return params_; }
  const MechanicalOscillator& mechanical() const { return params_.mechanical; }
  const OpticalCavity& cavity() const { return params_.cavity; }
  const DriveConfig& drive() const { return params_.drive; }
  const SqueezeConfig& squeeze() const { return params_.squeeze; }
  const SignalPulse& signal() const { return params_.signal; }
  const DerivedQuantities& derived() const { return derived_; }
  const std::vector<RegimeWarning>& warnings() const { return warnings_; }

  double K0() const { return derived_.K0; }
  /// 4 gamma0 eta^2 C0^2 / gamma^2, the degenerate-squeezing pump.
  double N0() const;

  SystemConfig with_squeeze(const SqueezeConfig& squeeze) const;
  SystemConfig with_drive(const DriveConfig& drive) const;
  SystemConfig with_cavity(const OpticalCavity& cavity) const;
  SystemConfig with_mechanical(const MechanicalOscillator& mech) const;

 private:
  SystemConfig() = default;
  SystemParameters params_;
  DerivedQuantities derived_;
  std::vector<RegimeWarning> warnings_;
};

namespace presets {

enum class TauPreset { Table1, Fig3 };

inline constexpr double kTauTable1 = 28e-6;   // s
inline constexpr double kTauFig3 = 0.28e-3;   // s

double tau_for(TauPreset preset);

/// SiN membrane + 10 cm cavity; drive K0 = pi / tau, no squeezing.
SystemParameters table1(TauPreset tau = TauPreset::Table1,
                        double quality_factor = 1e8);

}  // namespace presets

}  // namespace trimode
