#include "tcsim/device.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcsim/error.hpp"

namespace tcsim {

namespace pt = boost::property_tree;

void DeviceParams::validate() const {
  for (double f : {f1, f2, fc}) {
    if (!(f > 0.0) || !std::isfinite(f)) fail(ErrorCode::InvalidArgument, "frequencies must be positive");
  }
  for (double e : {eta1, eta2, etac}) {
    if (!(e > 0.0) || !std::isfinite(e)) fail(ErrorCode::InvalidArgument, "anharmonicities must be positive");
  }
  for (double g : {g1c, g2c, g12}) {
    if (!std::isfinite(g)) fail(ErrorCode::InvalidArgument, "couplings must be finite");
  }
}

double DeviceParams::dispersive_ratio1() const { return std::abs(g1c) / std::abs(fc - f1); }
double DeviceParams::dispersive_ratio2() const { return std::abs(g2c) / std::abs(fc - f2); }

void CoherenceTimes::validate() const {
  for (double t : {t1_q1, t1_q2, t2s_q1, t2s_q2}) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "coherence times must be positive");
  }
  if (t2s_q1 > 2.0 * t1_q1 || t2s_q2 > 2.0 * t1_q2) {
    fail(ErrorCode::InvalidArgument, "T2* cannot exceed 2 T1");
  }
}

void DeviceConfig::validate() const {
  q1_squid.validate();
  q2_squid.validate();
  coupler_squid.validate();
  network.validate();
  coherence.validate();
  for (double f : {readout.q1, readout.q2}) {
    if (!(f > 0.5) || f > 1.0) fail(ErrorCode::InvalidArgument, "readout fidelity must lie in (0.5, 1]");
  }
  if (!(gates.iswap_mod_freq > 0.0) || !(gates.cz_mod_freq > 0.0)) {
    fail(ErrorCode::InvalidArgument, "modulation frequencies must be positive");
  }
  if (gates.ramp < 0.0) fail(ErrorCode::InvalidArgument, "ramp must be non-negative");
  if (gates.sideband_cutoff < 0) fail(ErrorCode::InvalidArgument, "sideband cutoff must be >= 0");
  if (gates.guard_band < 0.0 || gates.collision_grid_margin < 0.0) {
    fail(ErrorCode::InvalidArgument, "guard band and grid margin must be non-negative");
  }
}

namespace {

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::string text(const std::string& section, const std::string& key) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (!node) fail(ErrorCode::Parse, "missing field [" + section + "] " + key);
    return node->get_value<std::string>();
  }

  double number(const std::string& section, const std::string& key) const {
    const std::string raw = text(section, key);
    double v = 0.0;
    const char* end = raw.data() + raw.size();
    auto [ptr, ec] = std::from_chars(raw.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
      fail(ErrorCode::Parse, "invalid number for [" + section + "] " + key + ": '" + raw + "'");
    }
    return v;
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = text(section, key);
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    fail(ErrorCode::Parse, "invalid boolean for [" + section + "] " + key + ": '" + raw + "'");
  }

  bool has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.')));
  }

 private:
  const pt::ptree& tree_;
};

SquidSpec read_squid(const Reader& r, const std::string& section) {
  return {r.number(section, "ejs_ghz"), r.number(section, "ejl_ghz")};
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

DeviceConfig parse_device_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Parse, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(tree);
  DeviceConfig c;
  c.name = r.has("device", "name") ? r.text("device", "name") : "device";
  c.synthetic = r.flag("device", "synthetic", false);

  c.q1_squid = read_squid(r, "qubit1");
  c.q2_squid = read_squid(r, "qubit2");
  c.coupler_squid = read_squid(r, "coupler");
  c.flux_q1 = r.number_or("qubit1", "flux_dc_phi0", 0.0);
  c.flux_q2 = r.number_or("qubit2", "flux_dc_phi0", 0.0);
  c.flux_coupler = r.number_or("coupler", "flux_dc_phi0", 0.0);

  auto& n = c.network;
  n.c01 = r.number("network", "c01_ff");
  n.c02 = r.number("network", "c02_ff");
  n.c03 = r.number("network", "c03_ff");
  n.c04 = r.number("network", "c04_ff");
  n.c05 = r.number("network", "c05_ff");
  n.c12 = r.number("network", "c12_ff");
  n.c13 = r.number_or("network", "c13_ff", 0.0);
  n.c23 = r.number("network", "c23_ff");
  n.c24 = r.number("network", "c24_ff");
  n.c34 = r.number("network", "c34_ff");
  n.c35 = r.number_or("network", "c35_ff", 0.0);
  n.c45 = r.number("network", "c45_ff");
  c.equal_qubit_coupler = r.flag("network", "equal_qubit_coupler", true);
  if (r.has("network", "energy_path")) {
    const std::string path = r.text("network", "energy_path");
    if (path == "exact") {
      c.approximate_energies = false;
    } else if (path == "approximate") {
      c.approximate_energies = true;
    } else {
      fail(ErrorCode::Parse, "invalid value for [network] energy_path: '" + path + "'");
    }
  }

  c.coherence.t1_q1 = r.number("coherence", "t1_q1_us");
  c.coherence.t1_q2 = r.number("coherence", "t1_q2_us");
  c.coherence.t2s_q1 = r.number("coherence", "t2s_q1_us");
  c.coherence.t2s_q2 = r.number("coherence", "t2s_q2_us");

  c.readout.q1 = r.number_or("readout", "fidelity_q1", 1.0);
  c.readout.q2 = r.number_or("readout", "fidelity_q2", 1.0);

  auto& g = c.gates;
  g.iswap_mod_freq = r.number_or("gates", "iswap_mod_freq_ghz", g.iswap_mod_freq);
  g.iswap_coupler_flux = r.number("gates", "iswap_coupler_flux_phi0");
  g.cz_mod_freq = r.number_or("gates", "cz_mod_freq_ghz", g.cz_mod_freq);
  g.cz_coupler_flux = r.number("gates", "cz_coupler_flux_phi0");
  g.ramp = r.number_or("gates", "ramp_ns", g.ramp);
  const double cutoff = r.number_or("gates", "sideband_cutoff", g.sideband_cutoff);
  if (cutoff != std::floor(cutoff)) fail(ErrorCode::Parse, "[gates] sideband_cutoff must be an integer");
  g.sideband_cutoff = static_cast<int>(cutoff);
  g.guard_band = r.number_or("gates", "guard_band_ghz", g.guard_band);
  g.collision_grid_margin = r.number_or("gates", "collision_grid_margin", g.collision_grid_margin);

  c.validate();
  return c;
}

DeviceConfig load_device_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_device_config(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string to_config_text(const DeviceConfig& c) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto num = [&](const char* k, double v) { kv(k, fmt(v)); };
  auto boolean = [&](const char* k, bool v) { kv(k, v ? "true" : "false"); };
  o << "[device]\n";
  kv("name", c.name);
  boolean("synthetic", c.synthetic);
  auto squid = [&](const char* section, const SquidSpec& s, double flux) {
    o << "\n[" << section << "]\n";
    num("ejs_ghz", s.ejs);
    num("ejl_ghz", s.ejl);
    num("flux_dc_phi0", flux);
  };
  squid("qubit1", c.q1_squid, c.flux_q1);
  squid("qubit2", c.q2_squid, c.flux_q2);
  squid("coupler", c.coupler_squid, c.flux_coupler);
  const auto& n = c.network;
  o << "\n[network]\n";
  num("c01_ff", n.c01);
  num("c02_ff", n.c02);
  num("c03_ff", n.c03);
  num("c04_ff", n.c04);
  num("c05_ff", n.c05);
  num("c12_ff", n.c12);
  num("c13_ff", n.c13);
  num("c23_ff", n.c23);
  num("c24_ff", n.c24);
  num("c34_ff", n.c34);
  num("c35_ff", n.c35);
  num("c45_ff", n.c45);
  boolean("equal_qubit_coupler", c.equal_qubit_coupler);
  kv("energy_path", c.approximate_energies ? "approximate" : "exact");
  o << "\n[coherence]\n";
  num("t1_q1_us", c.coherence.t1_q1);
  num("t1_q2_us", c.coherence.t1_q2);
  num("t2s_q1_us", c.coherence.t2s_q1);
  num("t2s_q2_us", c.coherence.t2s_q2);
  o << "\n[readout]\n";
  num("fidelity_q1", c.readout.q1);
  num("fidelity_q2", c.readout.q2);
  const auto& g = c.gates;
  o << "\n[gates]\n";
  num("iswap_mod_freq_ghz", g.iswap_mod_freq);
  num("iswap_coupler_flux_phi0", g.iswap_coupler_flux);
  num("cz_mod_freq_ghz", g.cz_mod_freq);
  num("cz_coupler_flux_phi0", g.cz_coupler_flux);
  num("ramp_ns", g.ramp);
  num("sideband_cutoff", g.sideband_cutoff);
  num("guard_band_ghz", g.guard_band);
  num("collision_grid_margin", g.collision_grid_margin);
  return o.str();
}

DeviceModel::DeviceModel(DeviceConfig config) : config_(std::move(config)) {
  config_.validate();
  const NetworkEnergies e = energies_from_network(config_.network);
  energies_ = config_.approximate_energies ? e.approximate : e.exact;
  q1_ = {energies_.ec1, config_.q1_squid, "q1"};
  q2_ = {energies_.ec2, config_.q2_squid, "q2"};
  coupler_ = {energies_.ecc, config_.coupler_squid, "coupler"};
  q1_levels_ = level_energies(q1_, flux_to_phase(config_.flux_q1));
}

DeviceParams DeviceModel::params(double flux_q2, double flux_coupler, double eta2_flux) const {
  const Levels l2 = level_energies(q2_, flux_to_phase(flux_q2));
  const Levels lc = level_energies(coupler_, flux_to_phase(flux_coupler));
  DeviceParams p;
  p.f1 = q1_levels_.f01;
  p.eta1 = q1_levels_.eta;
  p.f2 = l2.f01;
  p.eta2 = eta2_flux == flux_q2 ? l2.eta : level_energies(q2_, flux_to_phase(eta2_flux)).eta;
  p.fc = lc.f01;
  p.etac = lc.eta;
  const Couplings g = coupling_strengths(
      energies_, q1_, q2_, coupler_,
      {flux_to_phase(config_.flux_q1), flux_to_phase(flux_q2), flux_to_phase(flux_coupler)});
  p.g12 = g.g12;
  if (config_.equal_qubit_coupler) {
    const double gm = std::copysign(std::sqrt(std::abs(g.g1c * g.g2c)), g.g1c);
    p.g1c = gm;
    p.g2c = gm;
  } else {
    p.g1c = g.g1c;
    p.g2c = g.g2c;
  }
  return p;
}

DeviceParams DeviceModel::idle() const { return params(config_.flux_q2, config_.flux_coupler); }

double DeviceModel::q2_frequency(double flux) const {
  return level_energies(q2_, flux_to_phase(flux)).f01;
}

double DeviceModel::coupler_frequency(double flux) const {
  return level_energies(coupler_, flux_to_phase(flux)).f01;
}

}  // namespace tcsim
