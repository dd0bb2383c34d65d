#pragma once

#include <string>
#include <vector>

#include "tcsim/device.hpp"
#include "tcsim/dynamics.hpp"
#include "tcsim/effective.hpp"
#include "tcsim/tomography.hpp"

namespace tcsim {

enum class GateKind { ISwap, CZ20, CZ02 };

std::string to_string(GateKind kind);
GateKind parse_gate_kind(const std::string& text);
Exchange exchange_for(GateKind kind);

struct GateSpec {
  GateKind kind = GateKind::ISwap;
  double amplitude = 0.0;     // Phi0, qubit-2 modulation
  double mod_freq = 0.0;      // GHz
  double duration = 0.0;      // ns, effective (envelope area)
  double coupler_flux = 0.0;  // Phi0, absolute coupler bias during the gate
  double ramp = 0.0;          // ns
  double phi_dc = 0.0;        // Phi0, qubit-2 DC bias
  double z1 = 0.0;            // virtual-Z angles applied after the gate
  double z2 = 0.0;
  double resonance_residual = 0.0;  // GHz, |mean f2 - target| at `amplitude`

  void validate() const;
  FluxPulse q2_pulse() const;
  FluxPulse coupler_pulse(double idle_coupler_flux) const;
  double total_length() const { return duration + ramp; }
};

/// Bare resonance targets: iSWAP f1, CZ20 f1 - eta1, CZ02 f1 + eta2.
double resonance_target(GateKind kind, const DeviceParams& p);

/// Amplitude in [0, 0.5] Phi0 whose mean qubit-2 frequency hits the target.
/// With `dressed` the target is the exact avoided-crossing position instead of
/// the bare one.
double find_resonance_amplitude(GateKind kind, const TransmonSpec& q2, const DeviceParams& p, double mod_freq,
                                double phi_dc = 0.0, bool dressed = false);

struct CollisionMap {
  std::vector<double> amplitudes;
  std::vector<double> f2_mean;
  std::vector<double> iswap;  // |f2 - f1| / 2
  std::vector<double> cz02;   // |f2 - f1 - eta2| / 2
  std::vector<double> cz20;   // |f2 - f1 + eta1| / 2
  double guard_band = 0.0;
  double recommended = 0.0;   // max over all curves + guard band

  bool allows(double mod_freq) const { return mod_freq >= recommended; }
};

CollisionMap sideband_collision_map(const DeviceParams& p, const TransmonSpec& q2, double phi_dc,
                                    const std::vector<double>& amplitudes, double guard_band = 0.02);

/// iSWAP: 1 / (4 g); CZ: one full |11> <-> |20> cycle, 1 / (2 g).
double set_duration(GateKind kind, double g_eff);

/// Chevron grid centred on `spec`: 2 half_amp + 1 amplitudes spaced by
/// amp_step; for iSWAP also 2 half_dur + 1 durations spaced by dur_step.
ChevronRequest chevron_request(const DeviceModel& model, const GateSpec& spec, int half_amp, double amp_step,
                               int half_dur, double dur_step, const PropagationOptions& options = {});

/// Grid maximum of the target population. iSWAP uses (amplitude, duration);
/// CZ keeps the duration column closest to the initial one. Ties go to the
/// smaller amplitude. Fails when the maximum sits on the grid edge.
GateSpec refine_on_chevron(const GateSpec& initial, const ChevronResult& chevron);

struct GateEvaluation {
  CMat27 unitary;
  Mat4c projected;           // before virtual Z
  Mat4c corrected;           // after virtual Z
  Mat4c target;
  VirtualZ z;
  ProcessTensor ptm;         // corrected
  double average_fidelity = 0.0;
  double transfer = 0.0;     // |<01|U|10>| (iSWAP) or |<11|U|11>| (CZ)
  FSimFit fsim;
};

/// Propagate the gate and analyse it in the dressed (or bare) idle basis. With
/// `extract_z` the virtual-Z angles are recomputed, otherwise spec.z1/z2 apply.
GateEvaluation evaluate_gate(const DeviceModel& model, const GateSpec& spec, const PropagationOptions& options = {},
                             bool dressed = true, bool extract_z = true);

/// |<G(t) exp(-i theta(t))>| / G(0) over one modulation period, where G is the
/// SW coupling with the instantaneous flux-dependent g's at fixed mean f2.
/// Reduces to |eps_0| when the couplings do not depend on the qubit-2 flux.
double coupling_weight(const DeviceModel& model, GateKind kind, double coupler_flux, const FluxPulse& pulse);

/// Effective coupling of the n = 0 sideband at the dressed resonance: exact
/// avoided-crossing coupling times the coupling weight.
double effective_coupling(const DeviceModel& model, GateKind kind, double coupler_flux, double mod_freq,
                          double* amplitude_out = nullptr, double* weight_out = nullptr);

/// Coupler bias in [lo, hi] giving the requested effective coupling.
double coupler_bias_for_coupling(const DeviceModel& model, GateKind kind, double target_g, double mod_freq,
                                 double lo = -0.34, double hi = -0.15);

struct CalibrationOptions {
  int half_amp = 3;
  int half_dur = 3;
  double amp_step_fraction = 0.3;  // amplitude step shifts mean f2 by this fraction of g_eff
  double dur_step_fraction = 0.04; // duration step relative to tau
  bool polish = true;              // compass search after the grid
  int series_samples = 24;         // time series for the interaction-time fit
  bool dressed = true;
  PropagationOptions propagation;
};

struct CalibrationReport {
  GateKind kind = GateKind::ISwap;
  double coupler_flux = 0.0;
  double fc = 0.0;
  double target_bare = 0.0;
  double target_dressed = 0.0;
  double amplitude_analytic = 0.0;
  double resonance_residual = 0.0;
  double f2_mean = 0.0;
  double f2_excursion = 0.0;
  double eps0 = 0.0;
  double eps0_bessel = 0.0;
  CollisionMap collisions;
  double collision_margin = 0.0;   // mod_freq - recommended
  double g_sw = 0.0;               // modulated SW n = 0 coupling (signed)
  double g_exact = 0.0;            // exact static coupling
  double coupling_weight = 0.0;    // eps_0 including the flux dependence of the g's
  double g_eff = 0.0;
  double tau_analytic = 0.0;       // interaction time from g_eff
  double edge_delay = 0.0;         // ns added to the pulse for the ramps
  double population_initial = 0.0;
  double population_refined = 0.0;
  double g_dynamic = 0.0;          // fitted oscillation at the refined amplitude
  double interaction_time = 0.0;   // equivalent square-pulse duration of the gate
  double leakage = 0.0;
  double average_fidelity = 0.0;
  FSimFit fsim;
  double phase_error = 0.0;
  double coherence_fidelity = 0.0;
  std::vector<std::string> warnings;
};

struct Calibration {
  GateSpec spec;
  CalibrationReport report;
};

/// Operating point from the configured coupler bias and modulation frequency
/// without simulation: dressed resonance amplitude and tau from g_eff.
GateSpec analytic_gate(GateKind kind, const DeviceModel& model);

/// resonance -> collision -> coupling -> duration -> refine -> virtual-z ->
/// tomography. Errors carry the stage name as prefix.
Calibration calibrate_gate(GateKind kind, const DeviceModel& model, const CalibrationOptions& options = {});

}  // namespace tcsim
