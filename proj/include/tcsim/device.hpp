#pragma once

#include <numbers>
#include <string>

#include "tcsim/circuit.hpp"
#include "tcsim/spectrum.hpp"

namespace tcsim {

/// Three-body model parameters in GHz (E/h). Anharmonicities are magnitudes.
struct DeviceParams {
  double f1 = 0.0;
  double f2 = 0.0;
  double fc = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double etac = 0.0;
  double g1c = 0.0;
  double g2c = 0.0;
  double g12 = 0.0;

  void validate() const;
  /// g_kc / |fc - f_k| for k = 1, 2.
  double dispersive_ratio1() const;
  double dispersive_ratio2() const;
};

/// Coherence times in microseconds.
struct CoherenceTimes {
  double t1_q1 = 0.0;
  double t1_q2 = 0.0;
  double t2s_q1 = 0.0;
  double t2s_q2 = 0.0;

  void validate() const;
};

struct ReadoutFidelity {
  double q1 = 1.0;  // symmetric assignment fidelity
  double q2 = 1.0;
};

struct GateSettings {
  double iswap_mod_freq = 0.3;   // GHz
  double iswap_coupler_flux = 0.0;  // Phi0, absolute coupler bias during the gate
  double cz_mod_freq = 0.28;
  double cz_coupler_flux = 0.0;
  double ramp = 5.0;  // ns
  int sideband_cutoff = 5;
  double guard_band = 0.02;  // GHz
  double collision_grid_margin = 0.1;  // fractional extension beyond the operating amplitudes
};

struct DeviceConfig {
  std::string name = "device";
  bool synthetic = false;
  SquidSpec q1_squid;
  SquidSpec q2_squid;
  SquidSpec coupler_squid;
  double flux_q1 = 0.0;  // idle DC biases, Phi0
  double flux_q2 = 0.0;
  double flux_coupler = 0.0;
  CapacitanceNetwork network;
  bool equal_qubit_coupler = true;  // replace g1c, g2c by their geometric mean
  bool approximate_energies = false;
  CoherenceTimes coherence;
  ReadoutFidelity readout;
  GateSettings gates;

  void validate() const;
};

DeviceConfig parse_device_config(const std::string& text);
DeviceConfig load_device_config(const std::string& path);
/// Canonical INI text; parse_device_config(to_config_text(c)) reproduces c exactly.
std::string to_config_text(const DeviceConfig& c);

/// Flux-dependent three-body model built from a device description.
class DeviceModel {
 public:
  explicit DeviceModel(DeviceConfig config);

  const DeviceConfig& config() const { return config_; }
  const ChargingEnergies& energies() const { return energies_; }
  const TransmonSpec& q1() const { return q1_; }
  const TransmonSpec& q2() const { return q2_; }
  const TransmonSpec& coupler() const { return coupler_; }

  /// Parameters with qubit 2 and coupler at the given fluxes (Phi0), qubit 1 at
  /// its DC bias. eta2 is taken at `eta2_flux`, the DC point under modulation.
  DeviceParams params(double flux_q2, double flux_coupler, double eta2_flux) const;
  DeviceParams params(double flux_q2, double flux_coupler) const {
    return params(flux_q2, flux_coupler, flux_q2);
  }
  DeviceParams idle() const;

  double q2_frequency(double flux) const;
  double coupler_frequency(double flux) const;

 private:
  DeviceConfig config_;
  ChargingEnergies energies_;
  TransmonSpec q1_;
  TransmonSpec q2_;
  TransmonSpec coupler_;
  Levels q1_levels_;
};

inline double flux_to_phase(double flux) { return 2.0 * std::numbers::pi * flux; }

}  // namespace tcsim
