#include "tcsim/calibration.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <memory>
#include <numbers>

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    rethrow_with_stage(stage, e);
  }
}

FluxPulse modulation_shape(double phi_dc, double mod_freq) { return {phi_dc, 0.0, mod_freq, 0.0, 0.0, 0.0, "q2"}; }

double mean_f2(const TransmonSpec& q2, double phi_dc, double amplitude) {
  FluxPulse p = modulation_shape(phi_dc, 1.0);
  p.amplitude = amplitude;
  return average_and_excursion(q2, p).mean;
}

int initial_state(GateKind kind) { return kind == GateKind::ISwap ? basis_index(1, 0, 0) : basis_index(1, 0, 1); }
int target_state(GateKind kind) { return kind == GateKind::ISwap ? basis_index(0, 0, 1) : basis_index(1, 0, 1); }
int partner_state(GateKind kind) {
  switch (kind) {
    case GateKind::ISwap: return basis_index(0, 0, 1);
    case GateKind::CZ20: return basis_index(2, 0, 0);
    case GateKind::CZ02: return basis_index(0, 0, 2);
  }
  return 0;
}

double wrap(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double gate_coupler_flux(const DeviceConfig& c, GateKind kind) {
  return kind == GateKind::ISwap ? c.gates.iswap_coupler_flux : c.gates.cz_coupler_flux;
}

double gate_mod_freq(const DeviceConfig& c, GateKind kind) {
  return kind == GateKind::ISwap ? c.gates.iswap_mod_freq : c.gates.cz_mod_freq;
}

// Population of the gate's target state for a pulse of effective duration d.
class PopulationProbe {
 public:
  PopulationProbe(const DeviceModel& model, const GateSpec& base, const PropagationOptions& opt, bool dressed)
      : model_(model), base_(base), opt_(opt) {
    const DeviceParams idle = model.idle();
    in_ = dressed ? dressed_state(idle, initial_state(base.kind)) : CVec27::Unit(initial_state(base.kind));
    out_ = dressed ? dressed_state(idle, target_state(base.kind)) : CVec27::Unit(target_state(base.kind));
  }

  double operator()(double amplitude, double duration) {
    if (!prop_ || amplitude != amp_) {
      GateSpec s = base_;
      s.amplitude = amplitude;
      prop_ = std::make_unique<Propagator>(model_, s.q2_pulse(), s.coupler_pulse(model_.config().flux_coupler), opt_);
      amp_ = amplitude;
    }
    return std::norm(out_.dot(prop_->unitary(duration + base_.ramp) * in_));
  }

 private:
  const DeviceModel& model_;
  GateSpec base_;
  PropagationOptions opt_;
  CVec27 in_;
  CVec27 out_;
  std::unique_ptr<Propagator> prop_;
  double amp_ = 0.0;
};

// Exchange oscillation of the gate's transition versus effective duration,
// sampled on whole modulation periods.
ExchangeFit oscillation_fit(const DeviceModel& model, const GateSpec& spec, const CalibrationOptions& opt,
                            double g_guess) {
  Propagator prop(model, spec.q2_pulse(), spec.coupler_pulse(model.config().flux_coupler), opt.propagation);
  const DeviceParams idle = model.idle();
  const int a = initial_state(spec.kind);
  const int b = partner_state(spec.kind);
  const CVec27 in = opt.dressed ? dressed_state(idle, a) : CVec27::Unit(a);
  const CVec27 out = opt.dressed ? dressed_state(idle, b) : CVec27::Unit(b);
  const long m = std::lround(1.0 / (spec.mod_freq * prop.dt()));
  const long n0 = prop.steps_for(2.0 * spec.ramp);
  const double span = 1.25 / (2.0 * g_guess);
  const long stride = std::max<long>(1, std::lround(span / (opt.series_samples * m * prop.dt())));
  std::vector<double> ts;
  std::vector<double> ys;
  for (int s = 0; s < opt.series_samples; ++s) {
    const long n = n0 + static_cast<long>(s) * stride * m;
    ts.push_back(static_cast<double>(n) * prop.dt() - spec.ramp);
    ys.push_back(std::norm(out.dot(prop.unitary_steps(n) * in)));
  }
  return fit_exchange(ts, ys);
}

// P = A cos(4 pi g t + phase) + B leaves |0> fully at 4 pi g (t - delay) = pi.
double edge_delay(const ExchangeFit& fit) { return -wrap(fit.phase - kPi) / (4.0 * kPi * fit.g); }

}  // namespace

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::ISwap: return "iswap";
    case GateKind::CZ20: return "cz20";
    case GateKind::CZ02: return "cz02";
  }
  return "unknown";
}

GateKind parse_gate_kind(const std::string& text) {
  if (text == "iswap") return GateKind::ISwap;
  if (text == "cz" || text == "cz20") return GateKind::CZ20;
  if (text == "cz02") return GateKind::CZ02;
  fail(ErrorCode::InvalidArgument, "unknown gate kind '" + text + "' (expected iswap, cz, cz20 or cz02)");
}

Exchange exchange_for(GateKind kind) {
  switch (kind) {
    case GateKind::ISwap: return Exchange::E01;
    case GateKind::CZ20: return Exchange::E20;
    case GateKind::CZ02: return Exchange::E02;
  }
  return Exchange::E01;
}

void GateSpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) fail(ErrorCode::InvalidArgument, "gate duration must be positive");
  if (!(ramp >= 0.0) || duration < ramp) fail(ErrorCode::InvalidArgument, "gate duration must be at least one ramp");
  if (!(mod_freq > 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be positive");
  if (!(amplitude >= 0.0 && amplitude <= 0.5)) fail(ErrorCode::InvalidArgument, "modulation amplitude must lie in [0, 0.5] Phi0");
  if (!std::isfinite(coupler_flux) || !std::isfinite(phi_dc) || !std::isfinite(z1) || !std::isfinite(z2)) {
    fail(ErrorCode::InvalidArgument, "gate spec values must be finite");
  }
}

FluxPulse GateSpec::q2_pulse() const { return {phi_dc, amplitude, mod_freq, 0.0, total_length(), ramp, "q2"}; }

FluxPulse GateSpec::coupler_pulse(double idle_coupler_flux) const {
  return {idle_coupler_flux, coupler_flux - idle_coupler_flux, 0.0, 0.0, total_length(), ramp, "coupler"};
}

double resonance_target(GateKind kind, const DeviceParams& p) {
  switch (kind) {
    case GateKind::ISwap: return p.f1;
    case GateKind::CZ20: return p.f1 - p.eta1;
    case GateKind::CZ02: return p.f1 + p.eta2;
  }
  return p.f1;
}

double find_resonance_amplitude(GateKind kind, const TransmonSpec& q2, const DeviceParams& p, double mod_freq,
                                double phi_dc, bool dressed) {
  if (!(mod_freq > 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be positive");
  const double target = dressed ? exact_resonance_f2(p, exchange_for(kind)) : resonance_target(kind, p);
  return amplitude_for_mean_frequency(q2, modulation_shape(phi_dc, mod_freq), target);
}

CollisionMap sideband_collision_map(const DeviceParams& p, const TransmonSpec& q2, double phi_dc,
                                    const std::vector<double>& amplitudes, double guard_band) {
  if (amplitudes.empty()) fail(ErrorCode::InvalidArgument, "collision map amplitude grid is empty");
  CollisionMap m;
  m.amplitudes = amplitudes;
  m.guard_band = guard_band;
  double worst = 0.0;
  for (double a : amplitudes) {
    const double f2 = mean_f2(q2, phi_dc, a);
    m.f2_mean.push_back(f2);
    m.iswap.push_back(std::abs(f2 - p.f1) / 2.0);
    m.cz02.push_back(std::abs(f2 - p.f1 - p.eta2) / 2.0);
    m.cz20.push_back(std::abs(f2 - p.f1 + p.eta1) / 2.0);
    worst = std::max({worst, m.iswap.back(), m.cz02.back(), m.cz20.back()});
  }
  m.recommended = worst + guard_band;
  return m;
}

double set_duration(GateKind kind, double g_eff) {
  if (!(g_eff > 0.0) || !std::isfinite(g_eff)) fail(ErrorCode::InvalidArgument, "effective coupling must be positive");
  return kind == GateKind::ISwap ? 1.0 / (4.0 * g_eff) : 1.0 / (2.0 * g_eff);
}

ChevronRequest chevron_request(const DeviceModel& model, const GateSpec& spec, int half_amp, double amp_step,
                               int half_dur, double dur_step, const PropagationOptions& options) {
  if (half_amp < 1 || !(amp_step > 0.0)) fail(ErrorCode::InvalidArgument, "chevron amplitude grid needs at least three points");
  ChevronRequest req;
  req.q2_shape = spec.q2_pulse();
  req.coupler_shape = spec.coupler_pulse(model.config().flux_coupler);
  for (int k = -half_amp; k <= half_amp; ++k) req.amplitudes.push_back(spec.amplitude + k * amp_step);
  if (spec.kind == GateKind::ISwap) {
    if (half_dur < 1 || !(dur_step > 0.0)) fail(ErrorCode::InvalidArgument, "chevron duration grid needs at least three points");
    for (int k = -half_dur; k <= half_dur; ++k) req.durations.push_back(spec.duration + k * dur_step);
  } else {
    req.durations.push_back(spec.duration);
  }
  req.initial = initial_state(spec.kind);
  req.target = target_state(spec.kind);
  req.options = options;
  return req;
}

GateSpec refine_on_chevron(const GateSpec& initial, const ChevronResult& chevron) {
  const auto na = static_cast<Eigen::Index>(chevron.amplitudes.size());
  const auto nd = static_cast<Eigen::Index>(chevron.durations.size());
  if (na < 3 || nd < 1 || chevron.population.rows() != na || chevron.population.cols() != nd) {
    fail(ErrorCode::InvalidArgument, "chevron grid too small or inconsistent");
  }
  Eigen::Index j_lo = 0;
  Eigen::Index j_hi = nd - 1;
  if (initial.kind != GateKind::ISwap) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < nd; ++j) {
      if (std::abs(chevron.durations[static_cast<std::size_t>(j)] - initial.duration) <
          std::abs(chevron.durations[static_cast<std::size_t>(best)] - initial.duration)) {
        best = j;
      }
    }
    j_lo = j_hi = best;
  }
  // Ascending amplitude order so that strict improvement keeps the smaller one.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(na));
  for (Eigen::Index i = 0; i < na; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return chevron.amplitudes[static_cast<std::size_t>(a)] < chevron.amplitudes[static_cast<std::size_t>(b)];
  });
  Eigen::Index bi = -1;
  Eigen::Index bj = -1;
  double best = -1.0;
  for (Eigen::Index i : order) {
    for (Eigen::Index j = j_lo; j <= j_hi; ++j) {
      if (chevron.population(i, j) > best + 1e-12) {
        best = chevron.population(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  if (bi == order.front() || bi == order.back()) {
    fail(ErrorCode::Numeric, "no local maximum inside the chevron grid (amplitude edge)");
  }
  if (j_lo != j_hi && (bj == j_lo || bj == j_hi)) {
    fail(ErrorCode::Numeric, "no local maximum inside the chevron grid (duration edge)");
  }
  GateSpec out = initial;
  out.amplitude = chevron.amplitudes[static_cast<std::size_t>(bi)];
  out.duration = chevron.durations[static_cast<std::size_t>(bj)];
  return out;
}

GateEvaluation evaluate_gate(const DeviceModel& model, const GateSpec& spec, const PropagationOptions& options,
                             bool dressed, bool extract_z) {
  spec.validate();
  if (spec.kind == GateKind::CZ02) fail(ErrorCode::InvalidArgument, "CZ02 gates are not supported");
  GateEvaluation ev;
  Propagator prop(model, spec.q2_pulse(), spec.coupler_pulse(model.config().flux_coupler), options);
  ev.unitary = prop.unitary(spec.total_length());
  ev.projected = project(ev.unitary, computational_basis(model.idle(), dressed));
  ev.target = spec.kind == GateKind::ISwap ? iswap_ideal() : cz_ideal();
  ev.z = extract_z ? extract_virtual_z(ev.projected, ev.target) : VirtualZ{spec.z1, spec.z2};
  ev.corrected = virtual_z_correct(ev.projected, ev.z.z1, ev.z.z2);
  ev.ptm = ptm_from_operator(ev.corrected);
  ev.average_fidelity = average_fidelity(ev.ptm, ptm_from_operator(ev.target));
  ev.transfer = spec.kind == GateKind::ISwap ? std::abs(ev.corrected(1, 2)) : std::abs(ev.corrected(3, 3));
  ev.fsim = fit_fsim(ev.ptm);
  return ev;
}

double coupling_weight(const DeviceModel& model, GateKind kind, double coupler_flux, const FluxPulse& pulse) {
  const auto& cfg = model.config();
  const double f2_mean = average_and_excursion(model.q2(), pulse).mean;
  auto sw = [&](double flux) {
    DeviceParams q = model.params(flux, coupler_flux, pulse.phi_dc);
    q.f2 = f2_mean;
    const StaticEffective s = static_couplings(q);
    return kind == GateKind::ISwap ? s.g01 : kind == GateKind::CZ20 ? s.g20 : s.g02;
  };
  const double g0 = sw(cfg.flux_q2);
  if (pulse.amplitude == 0.0) return 1.0;
  // One flat-top period on a midpoint grid; theta accumulates the detuning of
  // f2 from its mean.
  constexpr int kSamples = 2048;
  const double period = 1.0 / pulse.mod_freq;
  const double dt = period / kSamples;
  std::complex<double> acc = 0.0;
  double theta = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = (k + 0.5) * dt;
    const double flux = pulse.phi_dc + pulse.amplitude * std::sin(2.0 * kPi * pulse.mod_freq * t + pulse.phase);
    const double f2 = level_energies(model.q2(), flux_to_phase(flux)).f01;
    const double half = kPi * (f2 - f2_mean) * dt;
    theta += half;
    acc += sw(flux) * std::exp(std::complex<double>(0.0, -theta));
    theta += half;
  }
  return std::abs(acc / static_cast<double>(kSamples)) / std::abs(g0);
}

double effective_coupling(const DeviceModel& model, GateKind kind, double coupler_flux, double mod_freq,
                          double* amplitude_out, double* weight_out) {
  const auto& cfg = model.config();
  const DeviceParams p = model.params(cfg.flux_q2, coupler_flux);
  const double a = find_resonance_amplitude(kind, model.q2(), p, mod_freq, cfg.flux_q2, true);
  FluxPulse pulse = modulation_shape(cfg.flux_q2, mod_freq);
  pulse.amplitude = a;
  const double w = coupling_weight(model, kind, coupler_flux, pulse);
  if (amplitude_out) *amplitude_out = a;
  if (weight_out) *weight_out = w;
  return exact_coupling(p, exchange_for(kind)) * w;
}

double coupler_bias_for_coupling(const DeviceModel& model, GateKind kind, double target_g, double mod_freq,
                                 double lo, double hi) {
  if (!(target_g > 0.0)) fail(ErrorCode::InvalidArgument, "target coupling must be positive");
  auto residual = [&](double flux) { return effective_coupling(model, kind, flux, mod_freq) - target_g; };
  const double r_lo = residual(lo);
  const double r_hi = residual(hi);
  if (r_lo * r_hi > 0.0) {
    fail(ErrorCode::Unreachable, "target coupling " + std::to_string(target_g * 1e3) +
                                     " MHz not bracketed by the coupler bias range");
  }
  boost::uintmax_t iters = 100;
  auto tol = [](double a, double b) { return b - a < 1e-9; };
  const auto root = boost::math::tools::toms748_solve(residual, lo, hi, r_lo, r_hi, tol, iters);
  return 0.5 * (root.first + root.second);
}

namespace {

CollisionMap device_collisions(const DeviceModel& model, GateKind kind, double own_amplitude) {
  const auto& cfg = model.config();
  double a_max = own_amplitude;
  for (GateKind k : {GateKind::ISwap, GateKind::CZ20}) {
    if (k == kind) continue;
    try {
      const DeviceParams pk = model.params(cfg.flux_q2, gate_coupler_flux(cfg, k));
      a_max = std::max(a_max, find_resonance_amplitude(k, model.q2(), pk, gate_mod_freq(cfg, k), cfg.flux_q2));
    } catch (const Error&) {
      // The other gate being unreachable does not restrict this one.
    }
  }
  const double top = std::min(0.5, (1.0 + cfg.gates.collision_grid_margin) * a_max);
  std::vector<double> grid;
  constexpr int kPoints = 41;
  for (int i = 0; i < kPoints; ++i) grid.push_back(top * i / (kPoints - 1));
  return sideband_collision_map(model.params(cfg.flux_q2, gate_coupler_flux(cfg, kind)), model.q2(), cfg.flux_q2,
                                grid, cfg.gates.guard_band);
}

}  // namespace

GateSpec analytic_gate(GateKind kind, const DeviceModel& model) {
  const auto& cfg = model.config();
  GateSpec spec;
  spec.kind = kind;
  spec.mod_freq = gate_mod_freq(cfg, kind);
  spec.coupler_flux = gate_coupler_flux(cfg, kind);
  spec.ramp = cfg.gates.ramp;
  spec.phi_dc = cfg.flux_q2;
  const DeviceParams p = model.params(cfg.flux_q2, spec.coupler_flux);
  staged("resonance", [&] {
    spec.amplitude = find_resonance_amplitude(kind, model.q2(), p, spec.mod_freq, spec.phi_dc, true);
    spec.resonance_residual =
        std::abs(mean_f2(model.q2(), spec.phi_dc, spec.amplitude) - exact_resonance_f2(p, exchange_for(kind)));
  });
  staged("duration", [&] {
    const double g = exact_coupling(p, exchange_for(kind)) *
                     coupling_weight(model, kind, spec.coupler_flux, spec.q2_pulse());
    spec.duration = set_duration(kind, g);
  });
  return spec;
}

Calibration calibrate_gate(GateKind kind, const DeviceModel& model, const CalibrationOptions& opt) {
  const auto& cfg = model.config();
  Calibration cal;
  CalibrationReport& rep = cal.report;
  GateSpec& spec = cal.spec;
  rep.kind = kind;
  spec.kind = kind;
  spec.mod_freq = gate_mod_freq(cfg, kind);
  spec.coupler_flux = gate_coupler_flux(cfg, kind);
  spec.ramp = cfg.gates.ramp;
  spec.phi_dc = cfg.flux_q2;
  rep.coupler_flux = spec.coupler_flux;
  const Exchange ex = exchange_for(kind);
  const DeviceParams p = model.params(cfg.flux_q2, spec.coupler_flux);
  rep.fc = p.fc;

  staged("resonance", [&] {
    rep.target_bare = resonance_target(kind, p);
    rep.target_dressed = exact_resonance_f2(p, ex);
    spec.amplitude = find_resonance_amplitude(kind, model.q2(), p, spec.mod_freq, spec.phi_dc, true);
    rep.amplitude_analytic = spec.amplitude;
    spec.resonance_residual = std::abs(mean_f2(model.q2(), spec.phi_dc, spec.amplitude) - rep.target_dressed);
    rep.resonance_residual = spec.resonance_residual;
  });

  staged("collision", [&] {
    rep.collisions = device_collisions(model, kind, spec.amplitude);
    rep.collision_margin = spec.mod_freq - rep.collisions.recommended;
    if (!rep.collisions.allows(spec.mod_freq)) {
      fail(ErrorCode::Unreachable, "modulation frequency " + std::to_string(spec.mod_freq) +
                                       " GHz is below the collision-free minimum " +
                                       std::to_string(rep.collisions.recommended) + " GHz");
    }
  });

  staged("coupling", [&] {
    const ModulatedCouplings mc = modulated_couplings(p, spec.q2_pulse(), model.q2(), cfg.gates.sideband_cutoff);
    rep.f2_mean = mc.f2_mean;
    rep.f2_excursion = mc.f2_excursion;
    rep.eps0 = std::abs(mc.eps[mc.idx(0)]);
    rep.eps0_bessel = mc.eps_bessel[mc.idx(0)];
    rep.g_sw = (kind == GateKind::ISwap ? mc.g01[mc.idx(0)] : mc.g20[mc.idx(0)]).real();
    rep.g_exact = exact_coupling(p, ex);
    rep.coupling_weight = coupling_weight(model, kind, spec.coupler_flux, spec.q2_pulse());
    rep.g_eff = rep.g_exact * rep.coupling_weight;
    for (const auto& w : static_couplings(p).warnings) rep.warnings.push_back(w);
  });

  staged("duration", [&] {
    rep.tau_analytic = set_duration(kind, rep.g_eff);
    spec.duration = rep.tau_analytic;
    // The ramps are mostly off resonance; lengthen the pulse by the delay they
    // cause so that the interaction time matches tau.
    rep.edge_delay = edge_delay(oscillation_fit(model, spec, opt, rep.g_eff));
    spec.duration = rep.tau_analytic + rep.edge_delay;
  });

  staged("refine", [&] {
    const double h = 1e-4;
    const double slope = std::abs(mean_f2(model.q2(), spec.phi_dc, spec.amplitude + h) -
                                  mean_f2(model.q2(), spec.phi_dc, std::max(0.0, spec.amplitude - h))) /
                         (spec.amplitude + h - std::max(0.0, spec.amplitude - h));
    if (!(slope > 0.0)) fail(ErrorCode::Numeric, "mean frequency is flat in the modulation amplitude");
    const double amp_step = opt.amp_step_fraction * rep.g_eff / slope;
    const double dur_step = opt.dur_step_fraction * spec.duration;
    ChevronRequest req = chevron_request(model, spec, opt.half_amp, amp_step, opt.half_dur, dur_step, opt.propagation);
    req.dressed = opt.dressed;
    req.threads = 1;
    const ChevronResult chev = chevron(model, req);
    const auto ci = static_cast<Eigen::Index>(opt.half_amp);
    const Eigen::Index cj = kind == GateKind::ISwap ? static_cast<Eigen::Index>(opt.half_dur) : 0;
    rep.population_initial = chev.population(ci, cj);
    spec = refine_on_chevron(spec, chev);

    PopulationProbe probe(model, spec, opt.propagation, opt.dressed);
    double best = probe(spec.amplitude, spec.duration);
    if (opt.polish) {
      double ha = 0.5 * amp_step;
      double hd = kind == GateKind::ISwap ? 0.5 * dur_step : 0.0;
      while (ha > amp_step / 512.0) {
        bool moved = false;
        const double cand[4][2] = {{ha, 0.0}, {-ha, 0.0}, {0.0, hd}, {0.0, -hd}};
        for (const auto& c : cand) {
          if (c[0] == 0.0 && c[1] == 0.0) continue;
          const double a = spec.amplitude + c[0];
          const double d = spec.duration + c[1];
          if (a < 0.0 || d < spec.ramp) continue;
          const double v = probe(a, d);
          if (v > best + 1e-13) {
            best = v;
            spec.amplitude = a;
            spec.duration = d;
            moved = true;
          }
        }
        if (!moved) {
          ha *= 0.5;
          hd *= 0.5;
        }
      }
    }
    rep.population_refined = best;
    spec.resonance_residual = std::abs(mean_f2(model.q2(), spec.phi_dc, spec.amplitude) - rep.target_dressed);

    const ExchangeFit fit = oscillation_fit(model, spec, opt, rep.g_eff);
    rep.g_dynamic = fit.resonant_coupling();
    rep.interaction_time = spec.duration - edge_delay(fit);
  });

  GateEvaluation ev = staged("virtual-z", [&] { return evaluate_gate(model, spec, opt.propagation, opt.dressed, true); });
  spec.z1 = ev.z.z1;
  spec.z2 = ev.z.z2;

  staged("tomography", [&] {
    rep.leakage = ev.ptm.leakage;
    rep.average_fidelity = ev.average_fidelity;
    rep.fsim = ev.fsim;
    rep.phase_error = kind == GateKind::ISwap ? phase_error(ev.fsim.phi) : phase_error(kPi - ev.fsim.phi);
    rep.coherence_fidelity = kind == GateKind::ISwap ? coherence_fidelity_iswap(cfg.coherence, spec.duration)
                                                     : coherence_fidelity_cz(cfg.coherence, spec.duration);
    if (rep.leakage > 1e-3) rep.warnings.push_back("leakage above 1e-3");
    if (!ev.fsim.warning.empty()) rep.warnings.push_back(ev.fsim.warning);
  });
  return cal;
}

}  // namespace tcsim
