#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimode/spectra.hpp"

namespace trimode {

struct FigureCurve {
  std::string label;     // file stem, e.g. "kappa_0.5g0"
  double rate_g0 = 0.0;  // kappa or upsilon in units of gamma0
  SpectrumSeries series;
};

struct FigureDataset {
  std::string id;
  std::string description;
  SystemParameters config;  // base configuration (no squeezing)
  double tau = 0.0;
  std::vector<FigureCurve> curves;
  nlohmann::json preset;    // sidecar contents
};

/// fig3 .. fig9.
const std::vector<std::string>& figure_ids();

/// Builds a figure dataset on the default grid. When tau is not given,
/// fig3 uses the 0.28 ms preset and the rest the 28 us preset.
FigureDataset figure_dataset(const std::string& id,
                             std::optional<presets::TauPreset> tau = {});

}  // namespace trimode
