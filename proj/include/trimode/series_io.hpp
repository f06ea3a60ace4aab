#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimode/oracle.hpp"
#include "trimode/spectra.hpp"

namespace trimode {

/// "%.17g": round-trips every double and is byte-stable.
std::string format_number(double value);

nlohmann::json case_to_json(const MeasurementCase& mcase);

/// Header "omega_rad_s,<quantity>" plus one column per channel when a
/// budget is given.
std::string series_to_csv(const SpectrumSeries& series,
                          const NoiseBudget* budget = nullptr);
nlohmann::json series_to_json(const SpectrumSeries& series,
                              const NoiseBudget* budget = nullptr);

nlohmann::json estimate_to_json(const OracleEstimate& estimate);
nlohmann::json report_to_json(const ValidationReport& report);

struct RunManifest {
  std::vector<std::string> command;
  nlohmann::json config;
  std::vector<std::string> outputs;
  std::vector<std::uint64_t> seeds;
  std::string version = TRIMODE_VERSION;
  std::string timestamp;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
};

/// UTC ISO-8601 time from SOURCE_DATE_EPOCH when set, else the wall clock.
std::string manifest_timestamp();

/// Writes via a temporary file and rename so no partial file is left behind.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace trimode
