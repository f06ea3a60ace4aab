#include "trimode/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace trimode {

namespace {

using constants::hbar;
using constants::pi;

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

// Threshold for "a << b" style regime conditions.
constexpr double kRegimeRatio = 0.1;

}  // namespace

MechanicalOscillator MechanicalOscillator::from_quality_factor(
    double mass, double omega_m, double quality_factor, double temperature) {
  require(finite_positive(quality_factor), "quality factor must be positive");
  return {mass, omega_m, omega_m / (2.0 * quality_factor), temperature};
}

double MechanicalOscillator::quality_factor() const {
  if (gamma_m == 0.0) return std::numeric_limits<double>::infinity();
  return omega_m / (2.0 * gamma_m);
}

void MechanicalOscillator::check() const {
  require(finite_positive(mass), "mechanical.mass must be positive");
  require(finite_positive(omega_m), "mechanical.omega_m must be positive");
  require(finite_nonnegative(gamma_m), "mechanical.gamma_m must be >= 0");
  require(gamma_m < omega_m, "mechanical oscillator must be underdamped");
  require(finite_nonnegative(temperature),
          "mechanical.temperature must be >= 0");
}

OpticalCavity OpticalCavity::from_wavelength(double gamma0, double gamma_e,
                                             double length,
                                             double wavelength) {
  require(finite_positive(wavelength), "wavelength must be positive");
  return {gamma0, gamma_e, length,
          2.0 * pi * constants::speed_of_light / wavelength};
}

OpticalCavity OpticalCavity::from_mirrors(double power_transmittance,
                                          double power_loss, double length,
                                          double wavelength) {
  require(finite_positive(length), "cavity.length must be positive");
  const double scale = constants::speed_of_light / (4.0 * length);
  return from_wavelength(scale * power_transmittance, scale * power_loss,
                         length, wavelength);
}

double OpticalCavity::wavelength() const {
  return 2.0 * pi * constants::speed_of_light / omega0;
}

void OpticalCavity::check() const {
  require(finite_positive(gamma0), "cavity.gamma0 must be positive");
  require(finite_nonnegative(gamma_e), "cavity.gamma_e must be >= 0");
  require(finite_positive(length), "cavity.length must be positive");
  require(finite_positive(omega0), "cavity.omega0 must be positive");
}

std::string squeeze_name(const SqueezeConfig& squeeze) {
  switch (squeeze.index()) {
    case 0: return "none";
    case 1: return "two_photon";
    default: return "degenerate";
  }
}

double squeeze_rate(const SqueezeConfig& squeeze) {
  if (auto* tp = std::get_if<TwoPhotonSqueezing>(&squeeze)) return tp->kappa;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&squeeze)) return dg->upsilon;
  return 0.0;
}

double SignalPulse::normalized_amplitude(
    const MechanicalOscillator& mech) const {
  return amplitude_F_s0 / std::sqrt(2.0 * hbar * mech.omega_m * mech.mass);
}

double SignalPulse::normalized_quadrature_amplitude(
    const MechanicalOscillator& mech) const {
  return 0.5 * normalized_amplitude(mech);
}

double thermal_occupancy(double omega_m, double temperature) {
  require(omega_m > 0.0, "omega_m must be positive");
  require(temperature >= 0.0, "temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(hbar * omega_m / (constants::k_boltzmann * temperature));
}

double braginsky_factor(double n_thermal, double omega_m, double tau,
                        double quality_factor) {
  return n_thermal * omega_m * tau / quality_factor;
}

double dimensionless_power(const OpticalCavity& cavity,
                           const MechanicalOscillator& mech,
                           double input_power) {
  require(cavity.gamma0 > cavity.gamma_e,
          "dimensionless power requires gamma0 > gamma_e");
  require(input_power >= 0.0, "input power must be >= 0");
  const double g = cavity.gamma();
  return 4.0 * cavity.gamma0 * cavity.omega0 * input_power /
         (mech.mass * mech.omega_m * cavity.length * cavity.length * g * g *
          (cavity.gamma0 - cavity.gamma_e));
}

double power_for_K0(const OpticalCavity& cavity,
                    const MechanicalOscillator& mech, double K0) {
  require(cavity.gamma0 > cavity.gamma_e,
          "dimensionless power requires gamma0 > gamma_e");
  const double g = cavity.gamma();
  return K0 * mech.mass * mech.omega_m * cavity.length * cavity.length * g *
         g * (cavity.gamma0 - cavity.gamma_e) /
         (4.0 * cavity.gamma0 * cavity.omega0);
}

std::vector<RegimeWarning> validate_regime(const SystemParameters& params) {
  const auto& cav = params.cavity;
  const auto& mech = params.mechanical;
  const double g = cav.gamma();

  if (auto* tp = std::get_if<TwoPhotonSqueezing>(&params.squeeze)) {
    if (!(tp->kappa >= 0.0))
      throw ConfigError("squeeze.kappa must be >= 0");
    if (tp->kappa > g) {
      std::ostringstream os;
      os << "two-photon gain kappa = " << tp->kappa
         << " exceeds the stability bound gamma0 + gamma_e = " << g;
      throw StabilityError(os.str());
    }
  }
  if (auto* dg = std::get_if<DegenerateSqueezing>(&params.squeeze)) {
    if (!(dg->upsilon >= 0.0))
      throw ConfigError("squeeze.upsilon must be >= 0");
    if (dg->upsilon >= g) {
      std::ostringstream os;
      os << "degenerate gain upsilon = " << dg->upsilon
         << " must stay below gamma0 + gamma_e = " << g;
      throw StabilityError(os.str());
    }
  }

  std::vector<RegimeWarning> out;
  auto check_small = [&](const char* name, double ratio, const char* what) {
    if (ratio > kRegimeRatio) out.push_back({name, ratio, what});
  };
  check_small("gamma_m << gamma", mech.gamma_m / g,
              "mechanical damping is not small against the optical rate");
  check_small("gamma << omega_m", g / mech.omega_m,
              "resolved-sideband condition violated");
  check_small("gamma_e << gamma0", cav.gamma_e / cav.gamma0,
              "optical loss is not small against input coupling");
  if (params.signal.duration_tau > 0.0) {
    const double cycles = mech.omega_m * params.signal.duration_tau;
    if (cycles < 10.0)
      out.push_back({"omega_m tau >> 1", cycles,
                     "signal pulse holds fewer than ~10 mechanical radians"});
  }
  return out;
}

SystemConfig SystemConfig::create(const SystemParameters& params) {
  params.mechanical.check();
  params.cavity.check();
  require(params.signal.duration_tau >= 0.0 &&
              std::isfinite(params.signal.duration_tau),
          "signal.tau must be >= 0");
  require(params.signal.amplitude_F_s0 >= 0.0,
          "signal.amplitude must be >= 0");
  require(finite_nonnegative(params.drive.value), "drive value must be >= 0");

  SystemConfig cfg;
  cfg.params_ = params;
  cfg.warnings_ = validate_regime(params);

  const auto& mech = params.mechanical;
  const auto& cav = params.cavity;
  auto& d = cfg.derived_;
  d.x0 = std::sqrt(hbar / (2.0 * mech.mass * mech.omega_m));
  d.n_thermal = thermal_occupancy(mech.omega_m, mech.temperature);
  d.quality_factor = mech.quality_factor();
  // n_T omega_m tau / Q written as 2 n_T gamma_m tau so gamma_m = 0 is finite.
  d.braginsky = 2.0 * d.n_thermal * mech.gamma_m * params.signal.duration_tau;
  d.eta = d.x0 * cav.omega0 / cav.length;

  if (params.drive.kind == DriveConfig::Kind::DimensionlessPump) {
    d.K0 = params.drive.value;
    d.input_power = power_for_K0(cav, mech, d.K0);
  } else {
    d.input_power = params.drive.value;
    d.K0 = dimensionless_power(cav, mech, d.input_power);
  }
  d.C0_squared = d.K0 * cav.gamma() * (cav.gamma0 - cav.gamma_e) /
                 (4.0 * cav.gamma0 * d.eta * d.eta);
  return cfg;
}

double SystemConfig::N0() const {
  const auto& cav = params_.cavity;
  return derived_.K0 * (cav.gamma0 - cav.gamma_e) / cav.gamma();
}

SystemConfig SystemConfig::with_squeeze(const SqueezeConfig& squeeze) const {
  SystemParameters p = params_;
  p.squeeze = squeeze;
  return create(p);
}

SystemConfig SystemConfig::with_drive(const DriveConfig& drive) const {
  SystemParameters p = params_;
  p.drive = drive;
  return create(p);
}

SystemConfig SystemConfig::with_cavity(const OpticalCavity& cavity) const {
  SystemParameters p = params_;
  p.cavity = cavity;
  return create(p);
}

SystemConfig SystemConfig::with_mechanical(
    const MechanicalOscillator& mech) const {
  SystemParameters p = params_;
  p.mechanical = mech;
  return create(p);
}

namespace presets {

double tau_for(TauPreset preset) {
  return preset == TauPreset::Table1 ? kTauTable1 : kTauFig3;
}

SystemParameters table1(TauPreset tau_preset, double quality_factor) {
  const double tau = tau_for(tau_preset);
  SystemParameters p;
  p.mechanical = MechanicalOscillator::from_quality_factor(
      50e-12, 2.0 * pi * 350e3, quality_factor, 20.0);
  p.cavity = OpticalCavity::from_mirrors(3e-4, 1e-6, 0.10, 1.55e-6);
  p.drive = DriveConfig::pump(pi / tau);
  p.squeeze = NoSqueezing{};
  p.signal = SignalPulse{0.0, tau, 0.0};
  return p;
}

}  // namespace presets

}  // namespace trimode
