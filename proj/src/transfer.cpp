#include "trimode/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace trimode {

namespace {

constexpr cplx I{0.0, 1.0};

cplx checked_ratio(cplx num, cplx den, const char* what) {
  if (den == cplx{0.0, 0.0})
    throw StabilityError(std::string(what) +
                         ": pole at the stability boundary");
  return num / den;
}

// Coefficients of one quadrature subsystem in role form. "open" is the
// port without mechanical information, "mech" the one carrying it.
struct PortModel {
  cplx open_pass;   // vacuum passing straight through the open port
  cplx open_loss;   // loss vacuum in the open port
  cplx mech_pass;
  cplx mech_loss;
  cplx back_action;  // multiplies (alpha + sqrt(ge/g0) eps) of the open pair
  cplx signal;       // multiplies (sqrt(2 gm) q + f)
  cplx filter;       // subtraction gain h
};

PortModel port_model(const MeasurementCase& mcase, const SystemConfig& config,
                     Quadrature quadrature, double omega) {
  const auto& cav = config.cavity();
  const double gm = config.mechanical().gamma_m;
  const cplx mech_pole = cplx{gm, -omega};
  if (mech_pole == cplx{0.0, 0.0})
    throw ConfigError("transfer undefined at Omega = 0 with gamma_m = 0");
  const double pump_omega =
      mcase.dispersion == PumpDispersion::Full ? omega : 0.0;
  const double loss_ratio = std::sqrt(cav.gamma_e / cav.gamma0);

  PortModel pm;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&mcase.squeeze)) {
    // Phase quadratures see the parametric gain with opposite sign.
    const double ups =
        quadrature == Quadrature::Amplitude ? dg->upsilon : -dg->upsilon;
    const auto c = degenerate_coeffs(cav, config.N0(), ups, omega);
    const cplx N = mcase.dispersion == PumpDispersion::Full
                       ? c.mathcal_N
                       : degenerate_coeffs(cav, config.N0(), ups, 0.0).mathcal_N;
    pm.open_pass = c.zeta;
    pm.open_loss = c.sigma * loss_ratio;
    pm.mech_pass = c.zeta;
    pm.mech_loss = c.sigma * loss_ratio;
    pm.back_action = -N / mech_pole;
    pm.signal = -std::sqrt(N) / mech_pole;
    pm.filter = checked_ratio(N, mech_pole * c.zeta, "zeta");
    return pm;
  }

  const double kappa = squeeze_rate(mcase.squeeze);
  const cplx xp = xi_pm(cav, kappa, omega, Sign::Plus);
  const cplx xm = xi_pm(cav, kappa, omega, Sign::Minus);
  const cplx K = mathcal_K(cav, config.K0(), kappa, pump_omega);
  const cplx xmK = xm * K;
  pm.open_pass = xp;
  pm.open_loss = mu_pm(cav, kappa, omega, Sign::Plus);
  pm.mech_pass = xm;
  pm.mech_loss = mu_pm(cav, kappa, omega, Sign::Minus);
  pm.back_action = -xmK / mech_pole;
  // Principal branch; only |xi_- K| reaches any spectrum.
  pm.signal = -std::sqrt(xmK) / mech_pole;
  pm.filter = checked_ratio(xmK, mech_pole * xp, "xi_+");
  return pm;
}

struct PortPair {
  Coefficients open{};
  Coefficients mech{};
  cplx filter;
};

// Literal channel labels: for amplitude quadratures the open port is the
// sum (beta_a+) and back action enters through the "+" inputs; the phase
// family swaps the roles of "+" and "-".
PortPair port_pair(const MeasurementCase& mcase, const SystemConfig& config,
                   Quadrature quadrature, double omega) {
  const PortModel pm = port_model(mcase, config, quadrature, omega);
  const double gm = config.mechanical().gamma_m;
  const double loss_ratio =
      std::sqrt(config.cavity().gamma_e / config.cavity().gamma0);

  const bool amp = quadrature == Quadrature::Amplitude;
  const auto open_alpha = static_cast<int>(amp ? NoiseChannel::AlphaPlus
                                               : NoiseChannel::AlphaMinus);
  const auto open_eps = static_cast<int>(amp ? NoiseChannel::EpsPlus
                                             : NoiseChannel::EpsMinus);
  const auto mech_alpha = static_cast<int>(amp ? NoiseChannel::AlphaMinus
                                               : NoiseChannel::AlphaPlus);
  const auto mech_eps = static_cast<int>(amp ? NoiseChannel::EpsMinus
                                             : NoiseChannel::EpsPlus);

  PortPair out;
  out.open[open_alpha] = pm.open_pass;
  out.open[open_eps] = pm.open_loss;

  out.mech[mech_alpha] = pm.mech_pass;
  out.mech[mech_eps] = pm.mech_loss;
  out.mech[open_alpha] = pm.back_action;
  out.mech[open_eps] = pm.back_action * loss_ratio;
  out.mech[static_cast<int>(NoiseChannel::Thermal)] =
      pm.signal * std::sqrt(2.0 * gm);
  out.mech[static_cast<int>(NoiseChannel::Signal)] = pm.signal;
  out.filter = pm.filter;
  return out;
}

struct FamilyPorts {
  TransferVector open;
  TransferVector mech;
};

FamilyPorts family_ports(const MeasurementCase& mcase,
                         const SystemConfig& config, double omega) {
  const auto w = mcase.family.weights();
  FamilyPorts fp;
  fp.open.omega = fp.mech.omega = omega;
  fp.open.signal_direction = fp.mech.signal_direction = w;
  for (int q = 0; q < 2; ++q) {
    if (w[q] == 0.0) continue;
    const auto pair = port_pair(mcase, config, static_cast<Quadrature>(q), omega);
    for (int c = 0; c < kChannelCount; ++c) {
      fp.open.coeffs[q][c] = w[q] * pair.open[c];
      fp.mech.coeffs[q][c] = w[q] * pair.mech[c];
    }
  }
  return fp;
}

}  // namespace

std::string_view channel_name(NoiseChannel channel) {
  switch (channel) {
    case NoiseChannel::AlphaPlus: return "alpha_plus";
    case NoiseChannel::AlphaMinus: return "alpha_minus";
    case NoiseChannel::EpsPlus: return "eps_plus";
    case NoiseChannel::EpsMinus: return "eps_minus";
    case NoiseChannel::Thermal: return "thermal";
    case NoiseChannel::Signal: return "signal";
  }
  return "unknown";
}

std::array<double, 2> QuadratureFamily::weights() const {
  switch (kind) {
    case Kind::Amplitude: return {1.0, 0.0};
    case Kind::Phase: return {0.0, 1.0};
    case Kind::General: return {std::cos(angle), std::sin(angle)};
  }
  return {1.0, 0.0};
}

std::string QuadratureFamily::name() const {
  switch (kind) {
    case Kind::Amplitude: return "amplitude";
    case Kind::Phase: return "phase";
    case Kind::General: {
      std::ostringstream os;
      os << "general(" << angle << ")";
      return os.str();
    }
  }
  return "unknown";
}

std::string_view combination_name(Combination combination) {
  switch (combination) {
    case Combination::SumPort: return "sum";
    case Combination::DifferencePort: return "difference";
    case Combination::Subtracted: return "subtracted";
  }
  return "unknown";
}

Combination MeasurementCase::signal_port() const {
  return family.kind == QuadratureFamily::Kind::Phase
             ? Combination::SumPort
             : Combination::DifferencePort;
}

cplx TransferVector::signal_gain() const {
  return signal_direction[0] * at(Quadrature::Amplitude, NoiseChannel::Signal) +
         signal_direction[1] * at(Quadrature::Phase, NoiseChannel::Signal);
}

double TransferVector::max_modulus() const {
  double m = 0.0;
  for (const auto& row : coeffs)
    for (const auto& c : row) m = std::max(m, std::abs(c));
  return m;
}

cplx xi_pm(const OpticalCavity& cav, double kappa, double omega, Sign sign) {
  const double s = sign == Sign::Plus ? 1.0 : -1.0;
  const cplx num = cav.gamma0 - cav.gamma_e + s * kappa + I * omega;
  const cplx den = cav.gamma0 + cav.gamma_e - s * kappa - I * omega;
  return checked_ratio(num, den, "xi");
}

cplx mu_pm(const OpticalCavity& cav, double kappa, double omega, Sign sign) {
  const double s = sign == Sign::Plus ? 1.0 : -1.0;
  const cplx den = cav.gamma0 + cav.gamma_e - s * kappa - I * omega;
  return checked_ratio(2.0 * std::sqrt(cav.gamma0 * cav.gamma_e), den, "mu");
}

cplx mathcal_K(const OpticalCavity& cav, double K0, double kappa,
               double omega) {
  const cplx shift = kappa + cav.gamma_e - I * omega;
  const cplx den = cav.gamma0 * cav.gamma0 - shift * shift;
  return checked_ratio(K0 * cav.gamma() * (cav.gamma0 - cav.gamma_e), den,
                       "K");
}

DegenerateCoefficients degenerate_coeffs(const OpticalCavity& cav, double N0,
                                         double upsilon, double omega) {
  const double g = cav.gamma();
  const cplx den = g + upsilon - I * omega;
  DegenerateCoefficients c;
  c.zeta = checked_ratio(cav.gamma0 - cav.gamma_e - upsilon + I * omega, den,
                         "zeta");
  c.sigma = 2.0 * cav.gamma0 / den;
  c.mathcal_N = g * g * N0 / (den * den);
  return c;
}

void check_case(const MeasurementCase& mcase, const SystemConfig& config) {
  SystemParameters p = config.parameters();
  p.squeeze = mcase.squeeze;
  (void)validate_regime(p);
}

TransferVector output_transfer(const MeasurementCase& mcase,
                               const SystemConfig& config, double omega) {
  check_case(mcase, config);
  if (mcase.combination == Combination::Subtracted)
    return subtracted_transfer(mcase, config, omega);
  auto ports = family_ports(mcase, config, omega);
  return mcase.combination == mcase.signal_port() ? ports.mech : ports.open;
}

cplx subtraction_filter(const MeasurementCase& mcase,
                        const SystemConfig& config, double omega) {
  const auto w = mcase.family.weights();
  cplx h{0.0, 0.0};
  bool have = false;
  for (int q = 0; q < 2; ++q) {
    if (w[q] == 0.0) continue;
    const cplx hq =
        port_model(mcase, config, static_cast<Quadrature>(q), omega).filter;
    if (have && std::abs(hq - h) > 1e-12 * std::abs(h))
      throw ConfigError(
          "back-action subtraction needs a single filter; degenerate "
          "squeezing at a general homodyne angle has two");
    h = hq;
    have = true;
  }
  return h;
}

TransferVector subtracted_transfer(const MeasurementCase& mcase,
                                   const SystemConfig& config, double omega) {
  check_case(mcase, config);
  const cplx h = subtraction_filter(mcase, config, omega);
  const auto ports = family_ports(mcase, config, omega);
  TransferVector out = ports.mech;
  const auto w = mcase.family.weights();
  for (int q = 0; q < 2; ++q) {
    for (int c = 0; c < kChannelCount; ++c)
      out.coeffs[q][c] += h * ports.open.coeffs[q][c];
    // h is built so the open-pair vacuum cancels identically; drop the
    // rounding residue.
    if (w[q] != 0.0)
      out.coeffs[q][static_cast<int>(q == 0 ? NoiseChannel::AlphaPlus
                                             : NoiseChannel::AlphaMinus)] = 0.0;
  }
  return out;
}

TransferVector signal_referenced(const TransferVector& tv) {
  if (tv.referenced) return tv;
  const cplx gain = tv.signal_gain();
  if (gain == cplx{0.0, 0.0})
    throw ConfigError("port carries no signal; cannot reference to force");
  TransferVector out = tv;
  for (auto& row : out.coeffs)
    for (auto& c : row) c /= gain;
  out.referenced = true;
  return out;
}

}  // namespace trimode
