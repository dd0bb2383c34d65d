#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "tcsim/device.hpp"
#include "tcsim/effective.hpp"
#include "tcsim/fluxcontrol.hpp"

namespace tcsim {

struct PropagationOptions {
  double dt_max = 0.0;  // ns; 0 selects 1 / (40 f_c,max)
  bool rwa = false;
  double unitarity_tol = 1e-8;
};

struct Propagation {
  CMat27 unitary;
  double dt = 0.0;       // ns
  long steps = 0;
  double unitarity_error = 0.0;
  std::vector<double> times;      // filled by propagate_state
  std::vector<CVec27> states;
};

/// Piecewise-constant midpoint propagator for a qubit-2 pulse and a coupler
/// pulse sharing one ramp. The step is dt = T_p / m with T_p the modulation
/// period, so flat-top steps repeat with period m and are cached by residue.
/// Pulse durations in the shapes are ignored; the total length is an argument.
class Propagator {
 public:
  Propagator(const DeviceModel& model, const FluxPulse& q2_shape, const FluxPulse& coupler_shape,
             const PropagationOptions& options = {});
  ~Propagator();
  Propagator(const Propagator&) = delete;
  Propagator& operator=(const Propagator&) = delete;

  double dt() const;
  /// Number of steps covering `total` ns, rounded to the nearest integer.
  long steps_for(double total) const;
  /// Unitary after exactly n full steps (total length n dt).
  CMat27 unitary_steps(long n);
  /// Unitary for an arbitrary total length; the last step may be partial.
  CMat27 unitary(double total);
  /// Instantaneous parameters at time t of a pulse of total length `total`.
  DeviceParams params_at(double t, double total) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Default step bound 1 / (40 f_c,max).
double default_dt_max(const DeviceModel& model);

/// Full propagation with the pulse durations taken from the pulses (which must
/// agree). Throws if the final unitary drifts from unitarity beyond tolerance.
Propagation propagate(const DeviceModel& model, const FluxPulse& q2_pulse, const FluxPulse& coupler_pulse,
                      const PropagationOptions& options = {});

/// Step-by-step state propagation recording every `stride` steps.
Propagation propagate_state(const DeviceModel& model, const FluxPulse& q2_pulse,
                            const FluxPulse& coupler_pulse, const CVec27& initial, int stride,
                            const PropagationOptions& options = {});

double unitarity_error(const CMat27& u);

struct ChevronRequest {
  FluxPulse q2_shape;       // amplitude overridden per grid row
  FluxPulse coupler_shape;
  std::vector<double> amplitudes;  // Phi0
  std::vector<double> durations;   // ns, effective (flat-top + one ramp)
  int initial = basis_index(1, 0, 0);
  int target = basis_index(0, 0, 1);
  bool dressed = true;
  PropagationOptions options;
  int threads = 0;  // 0 = hardware concurrency
};

struct ChevronResult {
  std::vector<double> amplitudes;
  std::vector<double> durations;  // effective durations actually simulated
  Eigen::MatrixXd population;     // rows amplitudes, cols durations
};

ChevronResult chevron(const DeviceModel& model, const ChevronRequest& request);

/// Total pulse length for an effective duration: the envelope area of a pulse
/// with raised-cosine ramps r is total - r.
inline double total_length(double effective, double ramp) { return effective + ramp; }

struct ExchangeFit {
  double g = 0.0;          // GHz, oscillation frequency / 2
  double decay = 0.0;      // 1/ns
  double phase = 0.0;      // rad
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;   // rms

  /// Contrast-corrected coupling: g_true = (f / 2) sqrt(2 |A|), removing the
  /// generalized-Rabi speed-up of a residual detuning.
  double resonant_coupling() const;
};

/// Least-squares fit to A exp(-gamma t) cos(2 pi (2 g) t + phase) + B.
ExchangeFit fit_exchange(const std::vector<double>& t, const std::vector<double>& population);

struct CouplingPoint {
  double coupler_flux = 0.0;
  double fc = 0.0;
  double dispersive_ratio = 0.0;
  double amplitude = 0.0;   // q2 modulation amplitude used
  double g_static = 0.0;    // signed modulated SW coupling g01_0 (real part)
  double g_dynamic = 0.0;   // magnitude from the fitted oscillation
  double fit_residual = 0.0;
};

struct CouplingSweepOptions {
  double mod_freq = 0.3;
  double ramp = 5.0;
  int samples = 36;
  double periods = 1.25;  // population-oscillation periods covered
  int sideband_cutoff = 5;
  PropagationOptions propagation;
};

/// For each coupler flux: set q2 modulation so the dressed qubit frequencies
/// coincide, simulate |10> -> |01> exchange, and fit the oscillation.
std::vector<CouplingPoint> coupling_vs_bias(const DeviceModel& model, const std::vector<double>& coupler_flux,
                                            const CouplingSweepOptions& options = {});

}  // namespace tcsim
