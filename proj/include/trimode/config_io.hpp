#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "trimode/model.hpp"

namespace trimode {

/// Parses the five-section configuration document. Unknown keys, missing
/// sections and conflicting alternatives are rejected with ConfigError.
///
/// Accepted alternatives:
///   mechanical: omega_m | frequency_hz;  gamma_m | quality_factor
///   cavity:     gamma0 + gamma_e | power_transmittance + power_loss;
///               omega0 | wavelength
///   drive:      K0 | input_power
///   squeeze:    type none | two_photon (kappa) | degenerate (upsilon)
SystemParameters parameters_from_json(const nlohmann::json& doc);

/// Canonical snapshot in SI rates; round-trips through parameters_from_json.
nlohmann::json parameters_to_json(const SystemParameters& params);

SystemParameters load_parameters(const std::filesystem::path& path);

nlohmann::json derived_to_json(const DerivedQuantities& derived);

}  // namespace trimode
