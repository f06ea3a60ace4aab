// trimode: command-line front end for spectra, figure datasets, detection
// thresholds and time-domain validation.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimode/config_io.hpp"
#include "trimode/figures.hpp"
#include "trimode/oracle.hpp"
#include "trimode/series_io.hpp"
#include "trimode/spectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trimode;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "0.9g0" -> 0.9 gamma0; plain numbers are SI.
double parse_rate(const std::string& text, double gamma0) {
  std::string s = text;
  double scale = 1.0;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "g0") == 0) {
    s.resize(s.size() - 2);
    scale = gamma0;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse rate '" + text + "'");
  }
  if (used != s.size()) throw UsageError("cannot parse rate '" + text + "'");
  return v * scale;
}

// Number in units of gamma0, with or without the "g0" suffix.
double parse_g0_units(const std::string& text) {
  std::string s = text;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "g0") == 0) s.resize(s.size() - 2);
  return parse_rate(s, 1.0);
}

struct GlobalOptions {
  std::string config_path;
  std::string tau_preset = "table1";
};

struct Loaded {
  SystemParameters params;
  std::string source;  // config path, or "preset:<name>"
};

Loaded load_config(const GlobalOptions& g) {
  std::string path = g.config_path;
  if (path.empty())
    if (const char* env = std::getenv("TRIMODE_CONFIG"); env && *env) path = env;
  if (!path.empty()) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    return {load_parameters(path), path};
  }
  const auto preset = g.tau_preset == "fig3" ? presets::TauPreset::Fig3
                                             : presets::TauPreset::Table1;
  return {presets::table1(preset), "preset:" + g.tau_preset};
}

struct CaseOptions {
  std::string name;
  std::string kappa, upsilon;
  std::string family = "amplitude";
  double angle = 0.0;
  std::string dispersion = "full";
};

const std::vector<std::string> kCaseNames = {"baseline", "baseline-sub",
                                             "nondeg-raw", "nondeg-sub",
                                             "deg-raw",  "deg-sub"};

MeasurementCase make_case(const CaseOptions& o, const SystemParameters& p) {
  MeasurementCase mc;
  const double g0 = p.cavity.gamma0;
  const std::string& n = o.name;
  const bool sub = n.size() > 4 && n.compare(n.size() - 4, 4, "-sub") == 0;
  if (n == "baseline" || n == "baseline-sub") {
    if (!o.kappa.empty() || !o.upsilon.empty())
      throw UsageError("baseline cases take no squeezing rate");
    mc.squeeze = NoSqueezing{};
  } else if (n == "nondeg-raw" || n == "nondeg-sub") {
    if (!o.upsilon.empty()) throw UsageError("nondeg cases take --kappa");
    double k = 0.0;
    if (!o.kappa.empty())
      k = parse_rate(o.kappa, g0);
    else if (auto* tp = std::get_if<TwoPhotonSqueezing>(&p.squeeze))
      k = tp->kappa;
    mc.squeeze = TwoPhotonSqueezing{k};
  } else if (n == "deg-raw" || n == "deg-sub") {
    if (!o.kappa.empty()) throw UsageError("deg cases take --upsilon");
    double u = 0.0;
    if (!o.upsilon.empty())
      u = parse_rate(o.upsilon, g0);
    else if (auto* dg = std::get_if<DegenerateSqueezing>(&p.squeeze))
      u = dg->upsilon;
    mc.squeeze = DegenerateSqueezing{u};
  } else {
    throw UsageError("unknown case '" + n + "'");
  }
  if (o.family == "amplitude")
    mc.family = QuadratureFamily::amplitude();
  else if (o.family == "phase")
    mc.family = QuadratureFamily::phase();
  else
    mc.family = QuadratureFamily::general(o.angle);
  mc.combination = sub ? Combination::Subtracted : mc.signal_port();
  mc.dispersion =
      o.dispersion == "constant" ? PumpDispersion::Constant : PumpDispersion::Full;
  return mc;
}

void add_case_options(CLI::App* cmd, CaseOptions& o) {
  cmd->add_option("--case", o.name, "Measurement case")
      ->required()
      ->check(CLI::IsMember(kCaseNames));
  cmd->add_option("--kappa", o.kappa, "Two-photon rate (SI or e.g. 0.5g0)");
  cmd->add_option("--upsilon", o.upsilon, "Degenerate rate (SI or e.g. 0.5g0)");
  cmd->add_option("--family", o.family, "Homodyne family")
      ->check(CLI::IsMember({"amplitude", "phase", "general"}));
  cmd->add_option("--angle", o.angle, "Homodyne angle for --family general, rad");
  cmd->add_option("--dispersion", o.dispersion, "Pump dispersion")
      ->check(CLI::IsMember({"full", "constant"}));
}

std::vector<std::string> strip_program(int argc, char** argv) {
  return std::vector<std::string>(argv + 1, argv + argc);
}

void write_manifest(const fs::path& path, const std::vector<std::string>& command,
                    const SystemParameters& params,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::uint64_t>& seeds) {
  RunManifest m;
  m.command = command;
  m.config = parameters_to_json(params);
  m.outputs = outputs;
  m.seeds = seeds;
  m.timestamp = manifest_timestamp();
  write_json(path, m.to_json());
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

// ---------------------------------------------------------------- spectrum
struct SpectrumOptions {
  CaseOptions c;
  std::string omega_min = "1e-3g0", omega_max = "10g0";
  std::size_t points = 400;
  bool budget = false;
  bool ratio = false;
  std::string method = "closed";
  std::string out;
};

int cmd_spectrum(const GlobalOptions& g, const SpectrumOptions& o,
                 const std::vector<std::string>& command) {
  const auto loaded = load_config(g);
  const auto config = SystemConfig::create(loaded.params);
  const auto mcase = make_case(o.c, loaded.params);
  const double g0 = config.cavity().gamma0;
  const auto grid = log_grid(parse_rate(o.omega_min, g0),
                             parse_rate(o.omega_max, g0), o.points);

  SpectrumSeries series = o.method == "assembled"
                              ? assembled_spectrum(mcase, config, grid)
                              : closed_form_spectrum(mcase, config, grid);
  std::optional<NoiseBudget> budget;
  if (o.budget) budget = noise_budget(mcase, config, grid);
  if (o.ratio) {
    const double gm = config.mechanical().gamma_m;
    if (budget)
      for (auto& ch : budget->channels)
        for (std::size_t i = 0; i < ch.values.size(); ++i)
          ch.values[i] /= sql_psd(gm, ch.omega[i]);
    series = ratio_to_sql(series, gm);
  }
  const NoiseBudget* b = budget ? &*budget : nullptr;

  const std::string csv = series_to_csv(series, b);
  const json doc = series_to_json(series, b);
  if (o.out.empty()) {
    std::cout << csv;
    return kExitOk;
  }
  const fs::path out = o.out;
  const fs::path json_path = sibling(out, ".json");
  write_text(out, csv);
  write_json(json_path, doc);
  write_manifest(sibling(out, ".manifest.json"), command, loaded.params,
                 {out.string(), json_path.string()}, {});
  return kExitOk;
}

// ------------------------------------------------------------------ figure
struct FigureOptions {
  std::string id;
  std::string out_dir = ".";
  bool tau_given = false;
};

int cmd_figure(const GlobalOptions& g, const FigureOptions& o,
               const std::vector<std::string>& command) {
  std::optional<presets::TauPreset> tau;
  if (o.tau_given)
    tau = g.tau_preset == "fig3" ? presets::TauPreset::Fig3
                                 : presets::TauPreset::Table1;
  const auto ds = figure_dataset(o.id, tau);
  const fs::path dir = o.out_dir;
  std::vector<std::string> outputs;
  json curves = json::array();
  for (const auto& c : ds.curves) {
    const fs::path p = dir / (ds.id + "_" + c.label + ".csv");
    write_text(p, series_to_csv(c.series));
    outputs.push_back(p.string());
    curves.push_back({{"label", c.label},
                      {"rate_g0", c.rate_g0},
                      {"file", p.filename().string()},
                      {"quantity", c.series.quantity},
                      {"method", c.series.method}});
  }
  json sidecar = ds.preset;
  sidecar["curves"] = curves;
  const fs::path side = dir / (ds.id + ".json");
  write_json(side, sidecar);
  outputs.push_back(side.string());
  write_manifest(dir / (ds.id + ".manifest.json"), command, ds.config, outputs, {});
  return kExitOk;
}

// --------------------------------------------------------------- threshold
struct ThresholdOptions {
  bool json_out = false;
  std::string omega;
  std::string out;
};

int cmd_threshold(const GlobalOptions& g, const ThresholdOptions& o,
                  const std::vector<std::string>& command) {
  const auto loaded = load_config(g);
  const auto config = SystemConfig::create(loaded.params);
  const auto& mech = config.mechanical();
  const double tau = config.signal().duration_tau;
  const auto td = detection_threshold_time_domain(mech, tau);

  const double omega = o.omega.empty() ? 2.0 * constants::pi / tau
                                       : parse_rate(o.omega, config.cavity().gamma0);
  MeasurementCase mc;
  mc.squeeze = config.squeeze();
  mc.combination = mc.signal_port();
  const double S = closed_form_psd(mc, config, omega);
  const double fs0 = detection_threshold_spectral(S, tau);
  const double force_scale =
      std::sqrt(2.0 * constants::hbar * mech.omega_m * mech.mass);

  const json doc = {
      {"n_thermal", config.derived().n_thermal},
      {"braginsky", config.derived().braginsky},
      {"tau", tau},
      {"optimal_K", td.optimal_K},
      {"force_threshold_band", td.force_band},
      {"force_threshold_sql_form", td.force_sql_form},
      {"force_sql", td.force_sql},
      {"band_quantum_term", td.band_quantum_term},
      {"sql_quantum_term", td.sql_quantum_term},
      {"short_pulse", td.short_pulse},
      {"spectral",
       {{"omega_rad_s", omega},
        {"psd", S},
        {"f_s0", fs0},
        {"force", fs0 * force_scale}}},
      {"input_power_for_K0", config.derived().input_power}};

  if (o.json_out) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("n_T                      %.6g\n", config.derived().n_thermal);
    std::printf("Braginsky factor B       %.6g\n", config.derived().braginsky);
    std::printf("optimal K*               %.6g rad/s\n", td.optimal_K);
    std::printf("F_s0 (band-integrated)   %.6g N\n", td.force_band);
    std::printf("F_s0 (SQL form)          %.6g N\n", td.force_sql_form);
    std::printf("F_SQL                    %.6g N\n", td.force_sql);
    std::printf("spectral F_s0 @ %.4g rad/s  %.6g N\n", omega, fs0 * force_scale);
    std::printf("P_in for K0              %.6g W\n", config.derived().input_power);
  }
  if (!o.out.empty()) {
    write_json(o.out, doc);
    write_manifest(sibling(o.out, ".manifest.json"), command, loaded.params,
                   {o.out}, {});
  }
  return kExitOk;
}

// ---------------------------------------------------------------- validate
struct ValidateOptions {
  CaseOptions c;
  std::uint64_t seed = 1;
  std::size_t segments = 200;
  double duration = 0.0;
  std::string perturb_kappa = "0";
  double tolerance = 0.05;
  std::string omega_min = "1e-2g0";
  std::string out;
};

int cmd_validate(const GlobalOptions& g, const ValidateOptions& o,
                 const std::vector<std::string>& command) {
  const auto loaded = load_config(g);
  const auto config = SystemConfig::create(loaded.params);
  const auto mcase = make_case(o.c, loaded.params);
  const double g0 = config.cavity().gamma0;

  ValidationOptions vo;
  vo.seed = o.seed;
  vo.tolerance = o.tolerance;
  vo.omega_lo_g0 = parse_rate(o.omega_min, g0) / g0;
  vo.perturb_kappa_g0 = parse_g0_units(o.perturb_kappa);
  vo.segments = o.segments;
  if (o.duration > 0.0) {
    const auto plan = plan_segments(config, mcase, vo);
    vo.segments = static_cast<std::size_t>(
        o.duration / (static_cast<double>(plan.length) * plan.dt));
  }
  if (vo.segments < 32)
    throw UsageError("validation needs at least 32 segments (got " +
                     std::to_string(vo.segments) + ")");

  auto report = validate(config, mcase, vo);
  report.case_label = o.c.name;
  std::printf("%s: %s (%.1f%% of %zu points agree, %zu segments, seed %llu)\n",
              o.c.name.c_str(), report.passed ? "PASS" : "FAIL",
              100.0 * report.agree_fraction, report.points.size(),
              report.segments, static_cast<unsigned long long>(report.seed));
  if (!o.out.empty()) {
    write_json(o.out, report_to_json(report));
    write_manifest(sibling(o.out, ".manifest.json"), command, loaded.params,
                   {o.out}, {o.seed});
  }
  return report.passed ? kExitOk : kExitValidationFailed;
}

int run(const std::vector<std::string>& args);

// ------------------------------------------------------------------ replay
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_replay(const std::string& manifest_path, bool check) {
  const auto manifest = RunManifest::from_json(read_json(manifest_path));

  if (manifest.command.front() == "replay")
    throw UsageError("manifest records a replay command");
  const bool is_figure =
      std::find(manifest.command.begin(), manifest.command.end(), "figure") !=
      manifest.command.end();

  // Figures are fully determined by their preset; everything else runs
  // against the embedded snapshot rather than the recorded config path.
  std::vector<std::string> args;
  for (std::size_t i = 0; i < manifest.command.size(); ++i) {
    const std::string& a = manifest.command[i];
    if (!is_figure) {
      if (a == "--config" || a == "-c" || a == "--tau-preset") {
        ++i;
        continue;
      }
      if (a.rfind("--config=", 0) == 0 || a.rfind("--tau-preset=", 0) == 0) continue;
    }
    args.push_back(a);
  }
  const fs::path snapshot =
      fs::temp_directory_path() /
      ("trimode-replay-" + std::to_string(std::hash<std::string>{}(manifest_path)) +
       ".json");
  if (!is_figure) {
    write_json(snapshot, manifest.config);
    args.insert(args.begin(), {"--config", snapshot.string()});
  }

  std::vector<std::pair<std::string, std::string>> before;
  if (check)
    for (const auto& out : manifest.outputs) before.emplace_back(out, slurp(out));

  const int rc = run(args);
  if (!is_figure) fs::remove(snapshot);
  if (rc == kExitUsage) return rc;
  if (check) {
    bool same = true;
    for (const auto& [path, bytes] : before) {
      const bool eq = slurp(path) == bytes;
      std::printf("%s %s\n", eq ? "identical" : "DIFFERS  ", path.c_str());
      same = same && eq;
    }
    if (!same) return kExitValidationFailed;
  }
  return rc;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"trimode: optomechanical force-sensing noise spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TRIMODE_VERSION));

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path,
                 "Configuration JSON (default: $TRIMODE_CONFIG, else the table1 preset)");
  auto* tau_opt = app.add_option("--tau-preset", g.tau_preset, "Signal duration preset")
                      ->check(CLI::IsMember({"table1", "fig3"}));

  SpectrumOptions so;
  auto* spectrum = app.add_subcommand("spectrum", "Write a noise spectrum");
  add_case_options(spectrum, so.c);
  spectrum->add_option("--omega-min", so.omega_min, "Lowest frequency (rad/s or g0)");
  spectrum->add_option("--omega-max", so.omega_max, "Highest frequency (rad/s or g0)");
  spectrum->add_option("--points", so.points, "Log-spaced grid points")
      ->check(CLI::Range(2, 1000000));
  spectrum->add_flag("--budget", so.budget, "Add per-channel columns");
  spectrum->add_flag("--ratio", so.ratio, "Write S / S_SQL instead of S");
  spectrum->add_option("--method", so.method, "closed or assembled")
      ->check(CLI::IsMember({"closed", "assembled"}));
  spectrum->add_option("-o,--out", so.out, "CSV path (JSON and manifest alongside)");

  FigureOptions fo;
  auto* figure = app.add_subcommand("figure", "Write a figure dataset");
  figure->add_option("id", fo.id, "Figure id")->required()->check(
      CLI::IsMember(figure_ids()));
  figure->add_option("-o,--out-dir", fo.out_dir, "Output directory");

  ThresholdOptions to;
  auto* threshold = app.add_subcommand("threshold", "Detection thresholds");
  threshold->add_flag("--json", to.json_out, "Print JSON");
  threshold->add_option("--omega", to.omega, "Frequency of the spectral threshold");
  threshold->add_option("-o,--out", to.out, "Write JSON report here");

  ValidateOptions vo;
  auto* val = app.add_subcommand("validate", "Time-domain cross-check");
  add_case_options(val, vo.c);
  val->add_option("--seed", vo.seed, "Random seed");
  auto* seg_opt = val->add_option("--segments", vo.segments, "Averaged segments");
  val->add_option("--duration", vo.duration, "Total simulated time, s")
      ->excludes(seg_opt);
  val->add_option("--perturb-kappa", vo.perturb_kappa,
                  "Extra kappa in the simulation only (units of gamma0)");
  val->add_option("--tolerance", vo.tolerance, "Relative tolerance");
  val->add_option("--omega-min", vo.omega_min, "Lowest compared frequency");
  val->add_option("-o,--out", vo.out, "Report JSON path");

  std::string manifest_path;
  bool check = false;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest");
  replay->add_option("manifest", manifest_path, "Manifest JSON")->required();
  replay->add_flag("--check", check, "Compare regenerated outputs byte for byte");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  fo.tau_given = tau_opt->count() > 0;

  try {
    if (*spectrum) return cmd_spectrum(g, so, args);
    if (*figure) return cmd_figure(g, fo, args);
    if (*threshold) return cmd_threshold(g, to, args);
    if (*val) return cmd_validate(g, vo, args);
    if (*replay) return cmd_replay(manifest_path, check);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StabilityError& e) {
    std::cerr << "unstable configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(strip_program(argc, argv)); }
