#include "trimode/series_io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "trimode/config_io.hpp"

namespace trimode {

using nlohmann::json;

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json case_to_json(const MeasurementCase& mcase) {
  json sq = {{"type", squeeze_name(mcase.squeeze)}};
  if (auto* tp = std::get_if<TwoPhotonSqueezing>(&mcase.squeeze)) sq["kappa"] = tp->kappa;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&mcase.squeeze)) sq["upsilon"] = dg->upsilon;
  json fam = {{"kind", mcase.family.name()}};
  if (mcase.family.kind == QuadratureFamily::Kind::General)
    fam = {{"kind", "general"}, {"angle", mcase.family.angle}};
  return {{"squeeze", sq},
          {"family", fam},
          {"combination", std::string(combination_name(mcase.combination))},
          {"dispersion",
           mcase.dispersion == PumpDispersion::Full ? "full" : "constant"}};
}

std::string series_to_csv(const SpectrumSeries& s, const NoiseBudget* budget) {
  std::ostringstream os;
  os << "omega_rad_s," << s.quantity;
  if (budget)
    for (auto c : kNoiseChannels) os << ',' << channel_name(c);
  os << '\n';
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    os << format_number(s.omega[i]) << ',' << format_number(s.values[i]);
    if (budget)
      for (const auto& ch : budget->channels) os << ',' << format_number(ch.values[i]);
    os << '\n';
  }
  return os.str();
}

json series_to_json(const SpectrumSeries& s, const NoiseBudget* budget) {
  json doc = {{"quantity", s.quantity},
              {"method", s.method},
              {"case", case_to_json(s.mcase)},
              {"config", parameters_to_json(s.config)},
              {"omega_rad_s", s.omega},
              {"values", s.values}};
  if (budget) {
    json ch = json::object();
    for (std::size_t i = 0; i < kNoiseChannels.size(); ++i)
      ch[std::string(channel_name(kNoiseChannels[i]))] = budget->channels[i].values;
    doc["channels"] = ch;
  }
  return doc;
}

json estimate_to_json(const OracleEstimate& e) {
  return {{"omega_rad_s", e.grid},  {"psd", e.psd},
          {"stderr", e.stderr_},    {"segments", e.segments},
          {"dt", e.dt},             {"seed", e.seed}};
}

json report_to_json(const ValidationReport& r) {
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"omega_rad_s", p.omega},
                   {"estimate", p.estimate},
                   {"stderr", p.stderr_},
                   {"expected", p.expected},
                   {"agrees", p.agrees}});
  return {{"case_label", r.case_label},
          {"case", case_to_json(r.mcase)},
          {"passed", r.passed},
          {"agree_fraction", r.agree_fraction},
          {"tolerance", r.tolerance},
          {"segments", r.segments},
          {"segment_length", r.segment_length},
          {"dt", r.dt},
          {"seed", r.seed},
          {"perturb_kappa_g0", r.perturb_kappa_g0},
          {"points", pts}};
}

json RunManifest::to_json() const {
  return {{"command", command}, {"config", config},   {"outputs", outputs},
          {"seeds", seeds},     {"version", version}, {"timestamp", timestamp}};
}

RunManifest RunManifest::from_json(const json& doc) {
  RunManifest m;
  try {
    m.command = doc.at("command").get<std::vector<std::string>>();
    m.config = doc.value("config", json());
    m.outputs = doc.value("outputs", std::vector<std::string>{});
    m.seeds = doc.value("seeds", std::vector<std::uint64_t>{});
    m.version = doc.value("version", std::string());
    m.timestamp = doc.value("timestamp", std::string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  if (m.command.empty()) throw ConfigError("manifest has an empty command");
  return m;
}

std::string manifest_timestamp() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 0) throw ConfigError("SOURCE_DATE_EPOCH must be a non-negative integer");
    t = static_cast<std::time_t>(v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace trimode
