#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "janus/analysis.hpp"
#include "janus/calibration.hpp"
#include "janus/energy.hpp"
#include "janus/simulator.hpp"

namespace janus {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- JSON -------------------------------------------------------------------
// Durations are integer microseconds under keys ending in "_us". Readers
// overlay the given object on `base` and reject unknown keys.

nlohmann::json to_json(const ProtocolConfig& p);
ProtocolConfig protocol_from_json(const nlohmann::json& j, ProtocolConfig base = {});
nlohmann::json to_json(const PhyConfig& p);
PhyConfig phy_from_json(const nlohmann::json& j, PhyConfig base = {});
nlohmann::json to_json(const Scenario& s);
/// Throws ScenarioInvalid on structural errors; the result is validated.
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CurrentTable& t);
CurrentTable current_table_from_json(const nlohmann::json& j);

// --- files ------------------------------------------------------------------

/// Throws IoError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
/// Creates parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

// --- CSV --------------------------------------------------------------------

void write_ranges_csv(std::ostream& os, const std::vector<RangeSample>& ranges);
void write_rssi_csv(std::ostream& os, const std::vector<RssiSample>& rssi);
void write_events_csv(std::ostream& os, const std::vector<EventRecord>& events);
void write_energy_csv(std::ostream& os, const std::vector<NodeEnergy>& energy, const CurrentTable& table,
                      const Battery& battery = {});
void write_latency_csv(std::ostream& os, const std::vector<LatencyRecord>& latency);

struct LifetimeSeries {
  std::string name;
  double alone_ma = 0.0;
  double contact_ma = 0.0;
};
/// p from 0 to 1 in steps of 0.05, one days column per series.
void write_lifetime_curve_csv(std::ostream& os, const std::vector<LifetimeSeries>& series,
                              const Battery& battery = {});

std::string pair_label(const Pair& p);
void write_contacts_csv(std::ostream& os, const std::vector<ContactRecord>& contacts);
void write_dyads_csv(std::ostream& os, const DyadReport& report);
void write_exposure_csv(std::ostream& os, const std::vector<Exposure>& exposure, const std::vector<Band>& bands);

// --- manifest ---------------------------------------------------------------

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

struct OutputFile {
  std::string name;
  std::string contents;
};

struct RunManifest {
  std::string command;
  std::string input;  // scenario or samples path as given
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;
  std::vector<OutputFile> files;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const RunManifest& m);

/// Hash over the raw input bytes and every option that affects output.
std::uint64_t config_hash(std::string_view input_bytes, std::string_view options);

}  // namespace janus
