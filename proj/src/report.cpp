#include "tcsim/report.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "tcsim/error.hpp"

namespace tcsim {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::Numeric, "sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string config_hash(const DeviceConfig& config) { return sha256_hex(to_config_text(config)); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Metadata make_metadata(const std::string& command, const DeviceConfig& config, std::uint64_t seed) {
  Metadata m;
  m.command = command;
  m.config_hash = config_hash(config);
  m.seed = seed;
  m.timestamp = utc_timestamp();
  return m;
}

json metadata_json(const Metadata& m) {
  json j;
  j["tool"] = "tcsim";
  j["version"] = m.version;
  j["command"] = m.command;
  j["config_sha256"] = m.config_hash;
  j["seed"] = m.seed;
  j["timestamp"] = m.timestamp;
  return j;
}

std::string csv_preamble(const Metadata& m) {
  std::ostringstream o;
  o << "# tool: tcsim " << m.version << "\n";
  o << "# command: " << m.command << "\n";
  o << "# config_sha256: " << m.config_hash << "\n";
  o << "# seed: " << m.seed << "\n";
  o << "# timestamp: " << m.timestamp << "\n";
  return o.str();
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp:", 0) == 0 || line.find("\"timestamp\":") != std::string::npos) continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json to_json(const DeviceParams& p) {
  return json{{"f1_ghz", p.f1},   {"f2_ghz", p.f2},     {"fc_ghz", p.fc},     {"eta1_ghz", p.eta1},
              {"eta2_ghz", p.eta2}, {"etac_ghz", p.etac}, {"g1c_ghz", p.g1c},   {"g2c_ghz", p.g2c},
              {"g12_ghz", p.g12}};
}

json to_json(const GateSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"amplitude_phi0", s.amplitude},
              {"mod_freq_ghz", s.mod_freq},
              {"duration_ns", s.duration},
              {"coupler_flux_phi0", s.coupler_flux},
              {"ramp_ns", s.ramp},
              {"phi_dc_phi0", s.phi_dc},
              {"virtual_z_rad", {s.z1, s.z2}},
              {"resonance_residual_ghz", s.resonance_residual}};
}

GateSpec gate_spec_from_json(const json& j) {
  const json& g = j.contains("gate") ? j.at("gate") : j;
  GateSpec s;
  try {
    s.kind = parse_gate_kind(g.at("kind").get<std::string>());
    s.amplitude = g.at("amplitude_phi0").get<double>();
    s.mod_freq = g.at("mod_freq_ghz").get<double>();
    s.duration = g.at("duration_ns").get<double>();
    s.coupler_flux = g.at("coupler_flux_phi0").get<double>();
    s.ramp = g.at("ramp_ns").get<double>();
    s.phi_dc = g.value("phi_dc_phi0", 0.0);
    const auto& z = g.at("virtual_z_rad");
    s.z1 = z.at(0).get<double>();
    s.z2 = z.at(1).get<double>();
    s.resonance_residual = g.value("resonance_residual_ghz", 0.0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("gate spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const CollisionMap& m) {
  return json{{"amplitudes_phi0", m.amplitudes}, {"f2_mean_ghz", m.f2_mean}, {"iswap_ghz", m.iswap},
              {"cz02_ghz", m.cz02},            {"cz20_ghz", m.cz20},       {"guard_band_ghz", m.guard_band},
              {"recommended_min_mod_freq_ghz", m.recommended}};
}

json to_json(const FSimFit& f) {
  json j{{"theta_rad", f.theta}, {"phi_rad", f.phi}, {"fidelity", f.fidelity_to_fit}};
  if (!f.warning.empty()) j["warning"] = f.warning;
  return j;
}

json to_json(const CalibrationReport& r) {
  json j;
  j["kind"] = to_string(r.kind);
  j["coupler_flux_phi0"] = r.coupler_flux;
  j["fc_ghz"] = r.fc;
  j["resonance"] = {{"target_bare_ghz", r.target_bare},
                    {"target_dressed_ghz", r.target_dressed},
                    {"amplitude_phi0", r.amplitude_analytic},
                    {"residual_ghz", r.resonance_residual},
                    {"f2_mean_ghz", r.f2_mean},
                    {"f2_excursion_ghz", r.f2_excursion}};
  j["collision"] = {{"recommended_min_mod_freq_ghz", r.collisions.recommended},
                    {"margin_ghz", r.collision_margin},
                    {"guard_band_ghz", r.collisions.guard_band}};
  j["coupling"] = {{"eps0", r.eps0},
                   {"eps0_bessel", r.eps0_bessel},
                   {"g_sw_ghz", r.g_sw},
                   {"g_exact_ghz", r.g_exact},
                   {"coupling_weight", r.coupling_weight},
                   {"g_eff_ghz", r.g_eff},
                   {"g_dynamic_ghz", r.g_dynamic}};
  j["duration"] = {{"tau_analytic_ns", r.tau_analytic},
                   {"edge_delay_ns", r.edge_delay},
                   {"interaction_time_ns", r.interaction_time}};
  j["refine"] = {{"population_initial", r.population_initial}, {"population_refined", r.population_refined}};
  j["tomography"] = {{"leakage", r.leakage},
                     {"average_fidelity", r.average_fidelity},
                     {"fsim", to_json(r.fsim)},
                     {"phase_error", r.phase_error},
                     {"coherence_limited_fidelity", r.coherence_fidelity}};
  j["warnings"] = r.warnings;
  return j;
}

std::string ptm_csv(const ProcessTensor& ptm, const Metadata& m) {
  json head = metadata_json(m);
  head.erase("timestamp");
  std::vector<std::string> labels;
  for (int k = 0; k < 16; ++k) labels.push_back(pauli_label(k));
  head["basis"] = labels;
  head["leakage"] = ptm.leakage;
  std::ostringstream o;
  o << "# " << head.dump() << "\n";
  o << "# timestamp: " << m.timestamp << "\n";
  o << "row";
  for (const auto& l : labels) o << "," << l;
  o << "\n";
  for (int i = 0; i < 16; ++i) {
    o << labels[static_cast<std::size_t>(i)];
    for (int j = 0; j < 16; ++j) o << "," << format_number(ptm.r(i, j));
    o << "\n";
  }
  return o.str();
}

ProcessTensor ptm_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ProcessTensor p;
  int row = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find('{');
      if (pos != std::string::npos) {
        const json head = json::parse(line.substr(pos), nullptr, false);
        if (!head.is_discarded() && head.contains("leakage")) p.leakage = head["leakage"].get<double>();
      }
      continue;
    }
    if (row < 0) {
      row = 0;  // header
      continue;
    }
    if (row >= 16) fail(ErrorCode::Parse, "PTM CSV has more than 16 rows");
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    for (int j = 0; j < 16; ++j) {
      if (!std::getline(cells, cell, ',')) fail(ErrorCode::Parse, "PTM CSV row " + std::to_string(row) + " is short");
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc()) fail(ErrorCode::Parse, "PTM CSV: invalid number '" + cell + "'");
      p.r(row, j) = v;
    }
    ++row;
  }
  if (row != 16) fail(ErrorCode::Parse, "PTM CSV must have 16 rows");
  return p;
}

std::string chevron_csv(const ChevronResult& c, const Metadata& m) {
  std::ostringstream o;
  o << csv_preamble(m);
  o << "amplitude_phi0";
  for (double d : c.durations) o << ",t" << format_number(d);
  o << "\n";
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
    o << format_number(c.amplitudes[i]);
    for (Eigen::Index j = 0; j < c.population.cols(); ++j) {
      o << "," << format_number(c.population(static_cast<Eigen::Index>(i), j));
    }
    o << "\n";
  }
  return o.str();
}

json chevron_sidecar(const ChevronResult& c, const ChevronRequest& req, const Metadata& m) {
  json j;
  j["metadata"] = metadata_json(m);
  j["amplitudes_phi0"] = c.amplitudes;
  j["durations_ns"] = c.durations;
  j["mod_freq_ghz"] = req.q2_shape.mod_freq;
  j["phi_dc_phi0"] = req.q2_shape.phi_dc;
  j["ramp_ns"] = req.q2_shape.ramp;
  j["coupler_flux_phi0"] = req.coupler_shape.phi_dc + req.coupler_shape.amplitude;
  j["initial_state"] = req.initial;
  j["target_state"] = req.target;
  j["dressed"] = req.dressed;
  return j;
}

std::string coupling_csv(const std::vector<CouplingPoint>& points, const Metadata& m) {
  std::ostringstream o;
  o << csv_preamble(m);
  o << "coupler_flux_phi0,fc_ghz,dispersive_ratio,amplitude_phi0,g_static_ghz,g_dynamic_ghz,fit_residual\n";
  for (const auto& p : points) {
    o << format_number(p.coupler_flux) << "," << format_number(p.fc) << "," << format_number(p.dispersive_ratio) << ","
      << format_number(p.amplitude) << "," << format_number(p.g_static) << "," << format_number(p.g_dynamic) << ","
      << format_number(p.fit_residual) << "\n";
  }
  return o.str();
}

std::string collision_csv(const CollisionMap& map, const Metadata& m) {
  std::ostringstream o;
  o << csv_preamble(m);
  o << "# recommended_min_mod_freq_ghz: " << format_number(map.recommended) << "\n";
  o << "amplitude_phi0,f2_mean_ghz,iswap_ghz,cz02_ghz,cz20_ghz\n";
  for (std::size_t i = 0; i < map.amplitudes.size(); ++i) {
    o << format_number(map.amplitudes[i]) << "," << format_number(map.f2_mean[i]) << "," << format_number(map.iswap[i])
      << "," << format_number(map.cz02[i]) << "," << format_number(map.cz20[i]) << "\n";
  }
  return o.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace tcsim
