#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "tcsim/calibration.hpp"
#include "tcsim/device.hpp"
#include "tcsim/dynamics.hpp"
#include "tcsim/tomography.hpp"

namespace tcsim {

using json = nlohmann::ordered_json;

/// Header carried by every output file. The timestamp sits on its own line so
/// that strip_timestamp() can drop it before comparing files.
struct Metadata {
  std::string version = TCSIM_VERSION;
  std::string command;
  std::string config_hash;  // sha256 of the canonical config text
  std::uint64_t seed = 0;
  std::string timestamp;
};

std::string sha256_hex(const std::string& data);
std::string config_hash(const DeviceConfig& config);
std::string utc_timestamp();
Metadata make_metadata(const std::string& command, const DeviceConfig& config, std::uint64_t seed = 0);

json metadata_json(const Metadata& m);
/// "# key: value" lines; timestamp last.
std::string csv_preamble(const Metadata& m);
std::string strip_timestamp(const std::string& text);

std::string format_number(double v);

json to_json(const DeviceParams& p);
json to_json(const GateSpec& s);
GateSpec gate_spec_from_json(const json& j);
json to_json(const CollisionMap& m);
json to_json(const CalibrationReport& r);
json to_json(const FSimFit& f);

std::string ptm_csv(const ProcessTensor& ptm, const Metadata& m);
ProcessTensor ptm_from_csv(const std::string& text);
std::string chevron_csv(const ChevronResult& c, const Metadata& m);
json chevron_sidecar(const ChevronResult& c, const ChevronRequest& req, const Metadata& m);
std::string coupling_csv(const std::vector<CouplingPoint>& points, const Metadata& m);
std::string collision_csv(const CollisionMap& map, const Metadata& m);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace tcsim
