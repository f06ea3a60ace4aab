#include "trimode/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace trimode {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const char* name,
                    std::initializer_list<const char*> allowed) {
  if (!section.is_object())
    throw ConfigError(std::string(name) + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : section.items())
    if (!keys.count(key))
      throw ConfigError("unknown key '" + key + "' in section " + name);
}

double number(const json& section, const char* section_name, const char* key) {
  const auto it = section.find(key);
  if (it == section.end())
    throw ConfigError(std::string(section_name) + "." + key + " is required");
  if (!it->is_number())
    throw ConfigError(std::string(section_name) + "." + key +
                      " must be a number");
  return it->get<double>();
}

// Exactly one of two alternative keys.
const char* pick(const json& section, const char* section_name, const char* a,
                 const char* b) {
  const bool has_a = section.contains(a);
  const bool has_b = section.contains(b);
  if (has_a == has_b)
    throw ConfigError(std::string(section_name) + ": give exactly one of " +
                      a + " or " + b);
  return has_a ? a : b;
}

const json& section(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) throw ConfigError(std::string("missing section ") + name);
  return *it;
}

}  // namespace

SystemParameters parameters_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, "document",
                 {"mechanical", "cavity", "drive", "squeeze", "signal"});

  SystemParameters p;

  const auto& mech = section(doc, "mechanical");
  reject_unknown(mech, "mechanical",
                 {"mass", "omega_m", "frequency_hz", "gamma_m",
                  "quality_factor", "temperature"});
  p.mechanical.mass = number(mech, "mechanical", "mass");
  const char* freq = pick(mech, "mechanical", "omega_m", "frequency_hz");
  p.mechanical.omega_m = number(mech, "mechanical", freq);
  if (std::string(freq) == "frequency_hz")
    p.mechanical.omega_m *= 2.0 * constants::pi;
  p.mechanical.temperature = number(mech, "mechanical", "temperature");
  const char* damping = pick(mech, "mechanical", "gamma_m", "quality_factor");
  if (std::string(damping) == "gamma_m") {
    p.mechanical.gamma_m = number(mech, "mechanical", "gamma_m");
  } else {
    p.mechanical = MechanicalOscillator::from_quality_factor(
        p.mechanical.mass, p.mechanical.omega_m,
        number(mech, "mechanical", "quality_factor"), p.mechanical.temperature);
  }

  const auto& cav = section(doc, "cavity");
  reject_unknown(cav, "cavity",
                 {"length", "gamma0", "gamma_e", "power_transmittance",
                  "power_loss", "omega0", "wavelength"});
  const double length = number(cav, "cavity", "length");
  const char* carrier = pick(cav, "cavity", "omega0", "wavelength");
  const double wavelength =
      std::string(carrier) == "wavelength"
          ? number(cav, "cavity", "wavelength")
          : 2.0 * constants::pi * constants::speed_of_light /
                number(cav, "cavity", "omega0");
  const char* rates = pick(cav, "cavity", "gamma0", "power_transmittance");
  if (std::string(rates) == "gamma0") {
    if (cav.contains("power_loss"))
      throw ConfigError("cavity: power_loss cannot be combined with gamma0");
    p.cavity = {number(cav, "cavity", "gamma0"),
                number(cav, "cavity", "gamma_e"), length, 0.0};
  } else {
    if (cav.contains("gamma_e"))
      throw ConfigError(
          "cavity: gamma_e cannot be combined with power_transmittance");
    p.cavity = OpticalCavity::from_mirrors(
        number(cav, "cavity", "power_transmittance"),
        number(cav, "cavity", "power_loss"), length, wavelength);
  }
  p.cavity.omega0 = std::string(carrier) == "omega0"
                        ? number(cav, "cavity", "omega0")
                        : 2.0 * constants::pi * constants::speed_of_light /
                              wavelength;

  const auto& drive = section(doc, "drive");
  reject_unknown(drive, "drive", {"K0", "input_power"});
  const char* drive_key = pick(drive, "drive", "K0", "input_power");
  p.drive = std::string(drive_key) == "K0"
                ? DriveConfig::pump(number(drive, "drive", "K0"))
                : DriveConfig::power(number(drive, "drive", "input_power"));

  const auto& sq = section(doc, "squeeze");
  reject_unknown(sq, "squeeze", {"type", "kappa", "upsilon"});
  if (!sq.contains("type") || !sq["type"].is_string())
    throw ConfigError("squeeze.type is required (none|two_photon|degenerate)");
  const auto type = sq["type"].get<std::string>();
  if (type == "none") {
    if (sq.contains("kappa") || sq.contains("upsilon"))
      throw ConfigError("squeeze: type none takes no rate");
    p.squeeze = NoSqueezing{};
  } else if (type == "two_photon") {
    if (sq.contains("upsilon"))
      throw ConfigError("squeeze: two_photon takes kappa, not upsilon");
    p.squeeze = TwoPhotonSqueezing{number(sq, "squeeze", "kappa")};
  } else if (type == "degenerate") {
    if (sq.contains("kappa"))
      throw ConfigError("squeeze: degenerate takes upsilon, not kappa");
    p.squeeze = DegenerateSqueezing{number(sq, "squeeze", "upsilon")};
  } else {
    throw ConfigError("squeeze.type must be none, two_photon or degenerate");
  }

  const auto& sig = section(doc, "signal");
  reject_unknown(sig, "signal", {"tau", "amplitude", "phase"});
  p.signal.duration_tau = number(sig, "signal", "tau");
  p.signal.amplitude_F_s0 =
      sig.contains("amplitude") ? number(sig, "signal", "amplitude") : 0.0;
  p.signal.phase_psi_f = sig.contains("phase") ? number(sig, "signal", "phase") : 0.0;
  return p;
}

json parameters_to_json(const SystemParameters& p) {
  json doc;
  doc["mechanical"] = {{"mass", p.mechanical.mass},
                       {"omega_m", p.mechanical.omega_m},
                       {"gamma_m", p.mechanical.gamma_m},
                       {"temperature", p.mechanical.temperature}};
  doc["cavity"] = {{"length", p.cavity.length},
                   {"gamma0", p.cavity.gamma0},
                   {"gamma_e", p.cavity.gamma_e},
                   {"omega0", p.cavity.omega0}};
  if (p.drive.kind == DriveConfig::Kind::DimensionlessPump)
    doc["drive"] = {{"K0", p.drive.value}};
  else
    doc["drive"] = {{"input_power", p.drive.value}};
  json sq = {{"type", squeeze_name(p.squeeze)}};
  if (auto* tp = std::get_if<TwoPhotonSqueezing>(&p.squeeze)) sq["kappa"] = tp->kappa;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&p.squeeze)) sq["upsilon"] = dg->upsilon;
  doc["squeeze"] = sq;
  doc["signal"] = {{"tau", p.signal.duration_tau},
                   {"amplitude", p.signal.amplitude_F_s0},
                   {"phase", p.signal.phase_psi_f}};
  return doc;
}

SystemParameters load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  return parameters_from_json(doc);
}

json derived_to_json(const DerivedQuantities& d) {
  return {{"x0", d.x0},
          {"n_thermal", d.n_thermal},
          {"braginsky", d.braginsky},
          {"eta", d.eta},
          {"C0_squared", d.C0_squared},
          {"K0", d.K0},
          {"input_power", d.input_power},
          {"quality_factor", d.quality_factor}};
}

}  // namespace trimode
