#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trimode/config_io.hpp"
#include "trimode/figures.hpp"
#include "trimode/oracle.hpp"
#include "trimode/series_io.hpp"
#include "trimode/spectra.hpp"

namespace py = pybind11;
using namespace trimode;

namespace {

nlohmann::json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object from_json(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

SystemConfig make_config(const py::object& config) {
  if (config.is_none()) return SystemConfig::create(presets::table1());
  return SystemConfig::create(parameters_from_json(to_json(config)));
}

py::array_t<double> array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

MeasurementCase make_case(const std::string& squeeze, double rate,
                          const std::string& combination, const std::string& family,
                          double angle, const std::string& dispersion) {
  MeasurementCase mc;
  if (squeeze == "none") {
    mc.squeeze = NoSqueezing{};
  } else if (squeeze == "two_photon") {
    mc.squeeze = TwoPhotonSqueezing{rate};
  } else if (squeeze == "degenerate") {
    mc.squeeze = DegenerateSqueezing{rate};
  } else {
    throw ConfigError("squeeze must be none, two_photon or degenerate");
  }
  if (family == "amplitude") {
    mc.family = QuadratureFamily::amplitude();
  } else if (family == "phase") {
    mc.family = QuadratureFamily::phase();
  } else if (family == "general") {
    mc.family = QuadratureFamily::general(angle);
  } else {
    throw ConfigError("family must be amplitude, phase or general");
  }
  if (combination == "subtracted") {
    mc.combination = Combination::Subtracted;
  } else if (combination == "signal") {
    mc.combination = mc.signal_port();
  } else if (combination == "sum") {
    mc.combination = Combination::SumPort;
  } else if (combination == "difference") {
    mc.combination = Combination::DifferencePort;
  } else {
    throw ConfigError("combination must be signal, sum, difference or subtracted");
  }
  if (dispersion == "full") {
    mc.dispersion = PumpDispersion::Full;
  } else if (dispersion == "constant") {
    mc.dispersion = PumpDispersion::Constant;
  } else {
    throw ConfigError("dispersion must be full or constant");
  }
  return mc;
}

#define CASE_ARGS                                                                 \
  py::arg("squeeze") = "none", py::arg("rate") = 0.0, py::arg("combination") = "signal", \
      py::arg("family") = "amplitude", py::arg("angle") = 0.0, py::arg("dispersion") = "full"

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optomechanical force-sensing noise spectra";
  m.attr("__version__") = TRIMODE_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<StabilityError>(m, "StabilityError", PyExc_ArithmeticError);

  m.def("table1", [] { return from_json(parameters_to_json(presets::table1())); },
        "The table1 preset configuration as a dict.");

  m.def("derived", [](const py::object& config) {
    const auto cfg = make_config(config);
    auto doc = derived_to_json(cfg.derived());
    doc["N0"] = cfg.N0();
    return from_json(doc);
  }, py::arg("config") = py::none());

  m.def("spectrum",
        [](const py::object& config, const std::vector<double>& omega, const std::string& method,
           const std::string& squeeze, double rate, const std::string& combination,
           const std::string& family, double angle, const std::string& dispersion) {
          const auto cfg = make_config(config);
          const auto mc = make_case(squeeze, rate, combination, family, angle, dispersion);
          SpectrumSeries s;
          if (method == "closed") {
            s = closed_form_spectrum(mc, cfg, omega);
          } else if (method == "assembled") {
            s = assembled_spectrum(mc, cfg, omega);
          } else {
            throw ConfigError("method must be closed or assembled");
          }
          return array(s.values);
        },
        py::arg("config"), py::arg("omega"), py::arg("method") = "closed", CASE_ARGS,
        "Signal-referred single-sided force PSD on the given grid (rad/s).");

  m.def("noise_budget",
        [](const py::object& config, const std::vector<double>& omega, const std::string& squeeze,
           double rate, const std::string& combination, const std::string& family, double angle,
           const std::string& dispersion) {
          const auto cfg = make_config(config);
          const auto b = noise_budget(make_case(squeeze, rate, combination, family, angle, dispersion),
                                      cfg, omega);
          py::dict out;
          for (std::size_t i = 0; i < kNoiseChannels.size(); ++i)
            out[py::str(std::string(channel_name(kNoiseChannels[i])))] = array(b.channels[i].values);
          out["total"] = array(b.total.values);
          return out;
        },
        py::arg("config"), py::arg("omega"), CASE_ARGS);

  m.def("sql_psd", &sql_psd, py::arg("gamma_m"), py::arg("omega"));
  m.def("default_grid", [](const py::object& config) {
    return array(default_grid(make_config(config).cavity()));
  }, py::arg("config") = py::none());

  m.def("threshold", [](const py::object& config, double tau) {
    const auto cfg = make_config(config);
    const auto t = detection_threshold_time_domain(cfg.mechanical(), tau);
    py::dict out;
    out["optimal_K"] = t.optimal_K;
    out["thermal_term"] = t.thermal_term;
    out["band_quantum_term"] = t.band_quantum_term;
    out["sql_quantum_term"] = t.sql_quantum_term;
    out["force_band"] = t.force_band;
    out["force_sql_form"] = t.force_sql_form;
    out["force_sql"] = t.force_sql;
    out["short_pulse"] = t.short_pulse;
    return out;
  }, py::arg("config") = py::none(), py::arg("tau") = presets::kTauTable1);

  m.def("figure", [](const std::string& id, const std::optional<std::string>& tau) {
    std::optional<presets::TauPreset> preset;
    if (tau) {
      if (*tau == "table1") preset = presets::TauPreset::Table1;
      else if (*tau == "fig3") preset = presets::TauPreset::Fig3;
      else throw ConfigError("tau preset must be table1 or fig3");
    }
    const auto ds = figure_dataset(id, preset);
    py::dict curves;
    for (const auto& c : ds.curves)
      curves[py::str(c.label)] = py::make_tuple(array(c.series.omega), array(c.series.values));
    py::dict out;
    out["id"] = ds.id;
    out["description"] = ds.description;
    out["preset"] = from_json(ds.preset);
    out["curves"] = curves;
    return out;
  }, py::arg("id"), py::arg("tau_preset") = py::none());
  m.def("figure_ids", &figure_ids);

  m.def("simulate",
        [](const py::object& config, double duration, double dt, std::uint64_t seed,
           const std::string& squeeze, double rate, const std::string& family, double angle) {
          const auto cfg = make_config(config);
          const auto mc = make_case(squeeze, rate, "signal", family, angle, "full");
          SimulationOptions o;
          o.duration = duration;
          o.dt = dt;
          o.seed = seed;
          OutputSeries s;
          {
            py::gil_scoped_release release;
            s = simulate(cfg, mc.squeeze, mc.family, o);
          }
          py::dict out;
          out["dt"] = s.dt;
          out["mechanical"] = array(s.mechanical);
          out["open"] = array(s.open);
          return out;
        },
        py::arg("config"), py::arg("duration"), py::arg("dt") = 0.0, py::arg("seed") = 0,
        py::arg("squeeze") = "none", py::arg("rate") = 0.0, py::arg("family") = "amplitude",
        py::arg("angle") = 0.0,
        "Time series of both output ports (mechanical and open).");

  m.def("validate",
        [](const py::object& config, std::size_t segments, std::uint64_t seed, double tolerance,
           double perturb_kappa_g0, double omega_lo_g0, const std::string& squeeze, double rate,
           const std::string& combination, const std::string& family, double angle,
           const std::string& dispersion) {
          const auto cfg = make_config(config);
          ValidationOptions vo;
          vo.segments = segments;
          vo.seed = seed;
          vo.tolerance = tolerance;
          vo.perturb_kappa_g0 = perturb_kappa_g0;
          vo.omega_lo_g0 = omega_lo_g0;
          const auto mc = make_case(squeeze, rate, combination, family, angle, dispersion);
          ValidationReport rep;
          {
            py::gil_scoped_release release;
            rep = validate(cfg, mc, vo);
          }
          return from_json(report_to_json(rep));
        },
        py::arg("config"), py::arg("segments") = 200, py::arg("seed") = 1, py::arg("tolerance") = 0.05,
        py::arg("perturb_kappa_g0") = 0.0, py::arg("omega_lo_g0") = 1e-2, CASE_ARGS);
}
