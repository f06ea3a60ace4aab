#include "trimode/figures.hpp"

#include <algorithm>
#include <cstdio>

#include "trimode/config_io.hpp"

namespace trimode {

namespace {

using presets::TauPreset;

struct FigureSpec {
  const char* id;
  const char* description;
  bool degenerate;
  bool subtracted;
  double pump_multiple;  // of pi / tau
};

constexpr FigureSpec kSpecs[] = {
    {"fig4", "raw two-photon spectrum over SQL", false, false, 1.0},
    {"fig5", "back-action-subtracted two-photon spectrum over SQL", false, true, 1.0},
    {"fig6", "back-action-subtracted two-photon spectrum over SQL, 4x pump", false, true, 4.0},
    {"fig7", "raw degenerate-squeezing spectrum over SQL", true, false, 1.0},
    {"fig8", "back-action-subtracted degenerate-squeezing spectrum over SQL", true, true, 1.0},
    {"fig9", "back-action-subtracted degenerate-squeezing spectrum over SQL, 4x pump", true, true, 4.0},
};

constexpr double kRates[] = {0.0, 0.5, 0.9};

std::string rate_label(const char* name, double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%gg0", name, r);
  return buf;
}

SystemParameters base_config(TauPreset tau) {
  SystemParameters p = presets::table1(tau);
  p.mechanical.gamma_m = 0.0;
  return p;
}

FigureDataset sql_figure(TauPreset tau) {
  FigureDataset ds;
  ds.id = "fig3";
  ds.description = "lossless quantum noise and SQL versus frequency";
  ds.config = base_config(tau);
  ds.config.cavity.gamma_e = 0.0;
  ds.tau = presets::tau_for(tau);
  const auto config = SystemConfig::create(ds.config);
  const auto grid = default_grid(config.cavity());

  MeasurementCase mcase;
  auto s_qu = closed_form_spectrum(mcase, config, grid);
  SpectrumSeries sql = s_qu;
  sql.method = "sql";
  sql.quantity = "sql_psd";
  for (std::size_t i = 0; i < grid.size(); ++i) sql.values[i] = sql_psd(0.0, grid[i]);

  ds.curves.push_back({"s_qu", 0.0, s_qu});
  ds.curves.push_back({"s_sql", 0.0, sql});
  ds.preset = {{"K0", config.K0()}, {"K0_over_pi_tau", 1.0}};
  return ds;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig3", "fig4", "fig5", "fig6",
                                               "fig7", "fig8", "fig9"};
  return ids;
}

FigureDataset figure_dataset(const std::string& id,
                             std::optional<TauPreset> tau_preset) {
  FigureDataset ds;
  if (id == "fig3") {
    ds = sql_figure(tau_preset.value_or(TauPreset::Fig3));
  } else {
    const auto* spec = std::find_if(std::begin(kSpecs), std::end(kSpecs),
                                    [&](const FigureSpec& s) { return id == s.id; });
    if (spec == std::end(kSpecs)) throw ConfigError("unknown figure id " + id);

    const TauPreset tau = tau_preset.value_or(TauPreset::Table1);
    ds.id = id;
    ds.description = spec->description;
    ds.tau = presets::tau_for(tau);
    ds.config = base_config(tau);
    const double pump = spec->pump_multiple * constants::pi / ds.tau;
    const auto& cav = ds.config.cavity;
    // Degenerate figures fix N0; K0 = N0 gamma / (gamma0 - gamma_e).
    const double K0 =
        spec->degenerate ? pump * cav.gamma() / (cav.gamma0 - cav.gamma_e) : pump;
    ds.config.drive = DriveConfig::pump(K0);
    const auto config = SystemConfig::create(ds.config);
    const auto grid = default_grid(config.cavity());

    for (double r : kRates) {
      MeasurementCase mcase;
      mcase.combination =
          spec->subtracted ? Combination::Subtracted : Combination::DifferencePort;
      const double rate = r * cav.gamma0;
      if (spec->degenerate)
        mcase.squeeze = DegenerateSqueezing{rate};
      else
        mcase.squeeze = TwoPhotonSqueezing{rate};
      auto psd = closed_form_spectrum(mcase, config, grid);
      auto ratio = ratio_to_sql(psd, 0.0);
      ratio.config.squeeze = mcase.squeeze;
      ds.curves.push_back(
          {rate_label(spec->degenerate ? "upsilon" : "kappa", r), r, ratio});
    }
    ds.preset = {{"K0", config.K0()},
                 {"N0", config.N0()},
                 {spec->degenerate ? "N0_over_pi_tau" : "K0_over_pi_tau",
                  spec->pump_multiple},
                 {"rates_g0", {0.0, 0.5, 0.9}},
                 {"squeezing", spec->degenerate ? "degenerate" : "two_photon"},
                 {"combination", spec->subtracted ? "subtracted" : "difference"}};
  }

  ds.preset["id"] = ds.id;
  ds.preset["description"] = ds.description;
  ds.preset["tau"] = ds.tau;
  ds.preset["gamma_m"] = 0.0;
  ds.preset["grid"] = {{"lo_g0", 1e-3}, {"hi_g0", 10.0}, {"points", 400}};
  ds.preset["config"] = parameters_to_json(ds.config);
  return ds;
}

}  // namespace trimode
