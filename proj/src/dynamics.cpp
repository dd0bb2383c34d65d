#include "tcsim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>
#include <unsupported/Eigen/NonLinearOptimization>

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double envelope(double t, double total, double ramp) {
  if (t <= 0.0 || t >= total) return 0.0;
  if (ramp <= 0.0) return 1.0;
  if (t < ramp) return 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
  if (t > total - ramp) return 0.5 * (1.0 - std::cos(std::numbers::pi * (total - t) / ramp));
  return 1.0;
}

double shaped_flux(const FluxPulse& p, double u, double t) {
  if (u == 0.0) return p.phi_dc;
  if (p.mod_freq == 0.0) return p.phi_dc + p.amplitude * u;
  return p.phi_dc + p.amplitude * u * std::sin(kTwoPi * p.mod_freq * t + p.phase);
}

CMat27 step_exponential(const RealMat27& h, double dt) {
  Eigen::SelfAdjointEigenSolver<RealMat27> es(h);
  const RealMat27& v = es.eigenvectors();
  CMat27 left = v.cast<std::complex<double>>();
  for (int k = 0; k < kDim; ++k) {
    const double a = -kTwoPi * es.eigenvalues()[k] * dt;
    left.col(k) *= std::complex<double>(std::cos(a), std::sin(a));
  }
  return left * v.transpose();
}

template <typename F>
void parallel_for(int n, int threads, F&& body) {
  int t = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  t = std::min(t, n);
  if (t <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        if (failed) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double unitarity_error(const CMat27& u) {
  return (u.adjoint() * u - CMat27::Identity()).cwiseAbs().maxCoeff();
}

double default_dt_max(const DeviceModel& model) {
  const DeviceParams p = model.params(0.0, 0.0);
  const double fmax = std::max({p.fc, p.f1, p.f2});
  return 1.0 / (40.0 * fmax);
}

struct Propagator::Impl {
  const DeviceModel& model;
  FluxPulse q2;
  FluxPulse cp;
  PropagationOptions opt;
  double ramp = 0.0;
  double dt = 0.0;
  long m = 1;
  long n_up = 0;

  std::vector<std::optional<CMat27>> flat;
  std::optional<CMat27> up;
  std::vector<CMat27> prefix;  // prefix[j]: j flat steps starting at residue n_up mod m
  std::vector<CMat27> period_pow;  // period^(2^k)
  std::map<std::pair<long, long>, CMat27> down;

  Impl(const DeviceModel& mdl, const FluxPulse& a, const FluxPulse& b, const PropagationOptions& o)
      : model(mdl), q2(a), cp(b), opt(o) {
    if (q2.ramp != cp.ramp) fail(ErrorCode::InvalidArgument, "qubit and coupler pulses must share the ramp");
    if (!(q2.mod_freq >= 0.0) || cp.mod_freq != 0.0) {
      fail(ErrorCode::InvalidArgument, "coupler pulse must be a DC step and qubit modulation non-negative");
    }
    ramp = q2.ramp;
    const double dt_max = opt.dt_max > 0.0 ? opt.dt_max : default_dt_max(model);
    if (q2.mod_freq > 0.0) {
      const double period = 1.0 / q2.mod_freq;
      m = static_cast<long>(std::ceil(period / dt_max - 1e-9));
      dt = period / static_cast<double>(m);
    } else {
      m = 1;
      dt = dt_max;
    }
    n_up = 0;
    while ((static_cast<double>(n_up) + 0.5) * dt < ramp) ++n_up;
    flat.resize(static_cast<std::size_t>(m));
  }

  DeviceParams params_at(double t, double total) const {
    const double u = envelope(t, total, ramp);
    return model.params(shaped_flux(q2, u, t), shaped_flux(cp, u, t), q2.phi_dc);
  }

  CMat27 exp_at(double t, double total, double len) const {
    return step_exponential(build_hamiltonian(params_at(t, total), opt.rwa).h, len);
  }

  const CMat27& flat_step(long k) {
    auto& slot = flat[static_cast<std::size_t>(k % m)];
    if (!slot) {
      // Any total works: the midpoint lies in the flat top by construction.
      const double t = (static_cast<double>(k) + 0.5) * dt;
      slot = step_exponential(build_hamiltonian(params_at(t, 1e300), opt.rwa).h, dt);
    }
    return *slot;
  }

  const CMat27& ramp_up() {
    if (!up) {
      CMat27 u = CMat27::Identity();
      for (long k = 0; k < n_up; ++k) u = exp_at((static_cast<double>(k) + 0.5) * dt, 1e300, dt) * u;
      up = u;
    }
    return *up;
  }

  void build_prefix() {
    if (!prefix.empty()) return;
    prefix.reserve(static_cast<std::size_t>(m + 1));
    prefix.push_back(CMat27::Identity());
    for (long j = 0; j < m; ++j) prefix.push_back(flat_step(n_up + j) * prefix.back());
    period_pow.push_back(prefix.back());
  }

  CMat27 flat_product(long count) {
    if (count <= 0) return CMat27::Identity();
    build_prefix();
    long q = count / m;
    const long r = count % m;
    CMat27 acc = CMat27::Identity();
    for (std::size_t bit = 0; q > 0; ++bit, q >>= 1) {
      while (period_pow.size() <= bit) period_pow.push_back(period_pow.back() * period_pow.back());
      if (q & 1) acc = period_pow[bit] * acc;
    }
    // Full periods commute with each other; the remainder continues from the
    // same residue since each period returns to it.
    return prefix[static_cast<std::size_t>(r)] * acc;
  }

  long first_down(double total, long limit) const {
    long k = n_up;
    while (k < limit && (static_cast<double>(k) + 0.5) * dt <= total - ramp) ++k;
    return k;
  }

  CMat27 direct(long from, long to, double total) const {
    CMat27 u = CMat27::Identity();
    for (long k = from; k < to; ++k) u = exp_at((static_cast<double>(k) + 0.5) * dt, total, dt) * u;
    return u;
  }

  CMat27 run_steps(long n) {
    const double total = static_cast<double>(n) * dt;
    if (n < 2 * n_up || total < 2.0 * ramp) return direct(0, n, total);
    const long kd = first_down(total, n);
    const CMat27 body = flat_product(kd - n_up) * ramp_up();
    const auto key = std::make_pair(n % m, n - kd);
    auto it = down.find(key);
    if (it == down.end()) it = down.emplace(key, direct(kd, n, total)).first;
    return it->second * body;
  }

  CMat27 run(double total) {
    const double steps = total / dt;
    const long n_round = std::lround(steps);
    if (std::abs(steps - static_cast<double>(n_round)) < 1e-9) return run_steps(n_round);
    const long n_full = static_cast<long>(std::floor(steps));
    CMat27 u;
    if (n_full < 2 * n_up || total < 2.0 * ramp) {
      u = direct(0, n_full, total);
    } else {
      const long kd = first_down(total, n_full);
      u = direct(kd, n_full, total) * flat_product(kd - n_up) * ramp_up();
    }
    const double start = static_cast<double>(n_full) * dt;
    const double len = total - start;
    return exp_at(start + 0.5 * len, total, len) * u;
  }
};

Propagator::Propagator(const DeviceModel& model, const FluxPulse& q2_shape, const FluxPulse& coupler_shape,
                       const PropagationOptions& options)
    : impl_(std::make_unique<Impl>(model, q2_shape, coupler_shape, options)) {}

Propagator::~Propagator() = default;

double Propagator::dt() const { return impl_->dt; }

long Propagator::steps_for(double total) const { return std::lround(total / impl_->dt); }

namespace {
void check_unitary(const CMat27& u, double tol) {
  const double err = unitarity_error(u);
  if (!(err < tol)) {
    fail(ErrorCode::Numeric, "unitarity drift " + std::to_string(err) + " exceeds tolerance; reduce dt");
  }
}
}  // namespace

CMat27 Propagator::unitary_steps(long n) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "negative step count");
  CMat27 u = impl_->run_steps(n);
  check_unitary(u, impl_->opt.unitarity_tol);
  return u;
}

CMat27 Propagator::unitary(double total) {
  if (!(total >= 0.0)) fail(ErrorCode::InvalidArgument, "negative duration");
  CMat27 u = impl_->run(total);
  check_unitary(u, impl_->opt.unitarity_tol);
  return u;
}

DeviceParams Propagator::params_at(double t, double total) const { return impl_->params_at(t, total); }

Propagation propagate(const DeviceModel& model, const FluxPulse& q2_pulse, const FluxPulse& coupler_pulse,
                      const PropagationOptions& options) {
  q2_pulse.validate();
  coupler_pulse.validate();
  if (q2_pulse.duration != coupler_pulse.duration) {
    fail(ErrorCode::InvalidArgument, "qubit and coupler pulses must have the same duration");
  }
  Propagator prop(model, q2_pulse, coupler_pulse, options);
  Propagation out;
  out.unitary = prop.unitary(q2_pulse.duration);
  out.dt = prop.dt();
  out.steps = static_cast<long>(std::ceil(q2_pulse.duration / prop.dt() - 1e-9));
  out.unitarity_error = unitarity_error(out.unitary);
  return out;
}

Propagation propagate_state(const DeviceModel& model, const FluxPulse& q2_pulse, const FluxPulse& coupler_pulse,
                            const CVec27& initial, int stride, const PropagationOptions& options) {
  q2_pulse.validate();
  coupler_pulse.validate();
  if (q2_pulse.duration != coupler_pulse.duration) {
    fail(ErrorCode::InvalidArgument, "qubit and coupler pulses must have the same duration");
  }
  if (stride < 1) fail(ErrorCode::InvalidArgument, "stride must be >= 1");
  Propagator prop(model, q2_pulse, coupler_pulse, options);
  const double total = q2_pulse.duration;
  Propagation out;
  out.dt = prop.dt();
  CVec27 psi = initial;
  CMat27 u = CMat27::Identity();
  out.times.push_back(0.0);
  out.states.push_back(psi);
  double t = 0.0;
  long k = 0;
  const double norm0 = initial.norm();
  while (t < total - 1e-12) {
    const double len = std::min(out.dt, total - t);
    const CMat27 e = step_exponential(build_hamiltonian(prop.params_at(t + 0.5 * len, total), options.rwa).h, len);
    psi = e * psi;
    u = e * u;
    t += len;
    ++k;
    if (k % stride == 0 || t >= total - 1e-12) {
      out.times.push_back(t);
      out.states.push_back(psi);
      if (std::abs(psi.norm() - norm0) > options.unitarity_tol) {
        fail(ErrorCode::Numeric, "state norm drift exceeds tolerance; reduce dt");
      }
    }
  }
  out.steps = k;
  out.unitary = u;
  out.unitarity_error = unitarity_error(u);
  check_unitary(u, options.unitarity_tol);
  return out;
}

ChevronResult chevron(const DeviceModel& model, const ChevronRequest& req) {
  if (req.amplitudes.empty() || req.durations.empty()) fail(ErrorCode::InvalidArgument, "chevron grids must be nonempty");
  const DeviceParams idle = model.idle();
  const CVec27 in = req.dressed ? dressed_state(idle, req.initial) : CVec27::Unit(req.initial);
  const CVec27 out = req.dressed ? dressed_state(idle, req.target) : CVec27::Unit(req.target);

  ChevronResult res;
  res.amplitudes = req.amplitudes;
  res.population.resize(static_cast<Eigen::Index>(req.amplitudes.size()), static_cast<Eigen::Index>(req.durations.size()));
  const double ramp = req.q2_shape.ramp;
  std::vector<long> steps;
  {
    Propagator probe(model, req.q2_shape, req.coupler_shape, req.options);
    for (double d : req.durations) {
      if (!(d >= ramp)) fail(ErrorCode::InvalidArgument, "chevron durations must be at least one ramp");
      const long n = probe.steps_for(total_length(d, ramp));
      steps.push_back(n);
      res.durations.push_back(static_cast<double>(n) * probe.dt() - ramp);
    }
  }
  parallel_for(static_cast<int>(req.amplitudes.size()), req.threads, [&](int i) {
    FluxPulse q2 = req.q2_shape;
    q2.amplitude = req.amplitudes[static_cast<std::size_t>(i)];
    Propagator prop(model, q2, req.coupler_shape, req.options);
    for (std::size_t j = 0; j < steps.size(); ++j) {
      const std::complex<double> a = out.dot(prop.unitary_steps(steps[j]) * in);
      res.population(i, static_cast<Eigen::Index>(j)) = std::norm(a);
    }
  });
  return res;
}

double ExchangeFit::resonant_coupling() const { return g * std::sqrt(std::min(1.0, 2.0 * std::abs(amplitude))); }

namespace {

struct CosineFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& t;
  const std::vector<double>& y;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(t.size()); }

  // x = (A, gamma, f, phase, B)
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          x[0] * std::exp(-x[1] * t[i]) * std::cos(kTwoPi * x[2] * t[i] + x[3]) + x[4] - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double e = std::exp(-x[1] * t[i]);
      const double arg = kTwoPi * x[2] * t[i] + x[3];
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      j(k, 0) = e * c;
      j(k, 1) = -t[i] * x[0] * e * c;
      j(k, 2) = -x[0] * e * s * kTwoPi * t[i];
      j(k, 3) = -x[0] * e * s;
      j(k, 4) = 1.0;
    }
    return 0;
  }
};

}  // namespace

ExchangeFit fit_exchange(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n != y.size() || n < 8) fail(ErrorCode::InvalidArgument, "fit_exchange needs at least 8 matched samples");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (sd < 1e-9) fail(ErrorCode::Numeric, "zero-contrast series; nothing to fit");

  std::vector<double> ts = t;
  std::sort(ts.begin(), ts.end());
  double min_dt = 1e300;
  for (std::size_t i = 1; i < n; ++i) {
    if (ts[i] > ts[i - 1]) min_dt = std::min(min_dt, ts[i] - ts[i - 1]);
  }
  const double span = ts.back() - ts.front();
  if (!(span > 0.0)) fail(ErrorCode::InvalidArgument, "sample times must span a positive interval");

  // Coarse periodogram: linear least squares on (cos, sin, 1) per trial frequency.
  const double f_lo = 0.25 / span;
  const double f_hi = 0.5 / min_dt;
  const int trials = 4000;
  double best_f = f_lo;
  double best_res = 1e300;
  Eigen::Vector3d best_coef = Eigen::Vector3d::Zero();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  for (int k = 0; k <= trials; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / trials;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      a(r, 0) = std::cos(kTwoPi * f * t[i]);
      a(r, 1) = std::sin(kTwoPi * f * t[i]);
      a(r, 2) = 1.0;
    }
    const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(yy);
    const double res = (a * coef - yy).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best_f = f;
      best_coef = coef;
    }
  }

  CosineFunctor functor{t, y};
  Eigen::LevenbergMarquardt<CosineFunctor> lm(functor);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 4000;
  Eigen::VectorXd x(5);
  x << std::hypot(best_coef[0], best_coef[1]), 0.0, best_f, std::atan2(-best_coef[1], best_coef[0]), best_coef[2];
  lm.minimize(x);

  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  functor(x, r);
  const double rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  if (!std::isfinite(rms) || rms > 0.5 * sd || !std::isfinite(x[2])) {
    fail(ErrorCode::Numeric, "exchange fit did not converge (residual norm " + std::to_string(r.norm()) + ")");
  }
  ExchangeFit fit;
  double amp = x[0];
  double phase = x[3];
  double f = x[2];
  if (f < 0.0) {
    f = -f;
    phase = -phase;
  }
  if (amp < 0.0) {
    amp = -amp;
    phase += std::numbers::pi;
  }
  fit.g = 0.5 * f;
  fit.decay = x[1];
  fit.phase = std::remainder(phase, kTwoPi);
  fit.amplitude = amp;
  fit.offset = x[4];
  fit.residual = rms;
  return fit;
}

std::vector<CouplingPoint> coupling_vs_bias(const DeviceModel& model, const std::vector<double>& coupler_flux,
                                            const CouplingSweepOptions& opt) {
  if (coupler_flux.empty()) fail(ErrorCode::InvalidArgument, "coupler flux grid is empty");
  const auto& cfg = model.config();
  const DeviceParams idle = model.idle();
  const CVec27 in = dressed_state(idle, basis_index(1, 0, 0));
  const CVec27 out = dressed_state(idle, basis_index(0, 0, 1));
  std::vector<CouplingPoint> points;
  for (double fc_flux : coupler_flux) {
    CouplingPoint pt;
    pt.coupler_flux = fc_flux;
    const DeviceParams p = model.params(cfg.flux_q2, fc_flux);
    pt.fc = p.fc;
    pt.dispersive_ratio = std::max(p.dispersive_ratio1(), p.dispersive_ratio2());

    FluxPulse q2{cfg.flux_q2, 0.0, opt.mod_freq, 0.0, 0.0, opt.ramp, "q2"};
    const FluxPulse cp{cfg.flux_coupler, fc_flux - cfg.flux_coupler, 0.0, 0.0, 0.0, opt.ramp, "coupler"};
    // Resonance of the dressed single-excitation states, then the modulation
    // amplitude whose average frequency reaches it.
    const double f2_target = exact_resonance_f2(p, Exchange::E01);
    q2.amplitude = amplitude_for_mean_frequency(model.q2(), q2, f2_target);
    pt.amplitude = q2.amplitude;
    const ModulatedCouplings mc = modulated_couplings(p, q2, model.q2(), opt.sideband_cutoff);
    pt.g_static = mc.g01[mc.idx(0)].real();

    Propagator prop(model, q2, cp, opt.propagation);
    const double g_est = std::max(std::abs(pt.g_static), 5e-5);
    const double span = opt.periods / (2.0 * g_est);
    const long m = std::lround((1.0 / opt.mod_freq) / prop.dt());
    const long n0 = prop.steps_for(2.0 * opt.ramp);
    const long stride = std::max<long>(1, std::lround(span / (opt.samples * (1.0 / opt.mod_freq))));
    std::vector<double> ts;
    std::vector<double> ys;
    for (int s = 0; s < opt.samples; ++s) {
      const long n = n0 + static_cast<long>(s) * stride * m;
      const CMat27 u = prop.unitary_steps(n);
      ts.push_back(static_cast<double>(n) * prop.dt() - opt.ramp);
      ys.push_back(std::norm(out.dot(u * in)));
    }
    const ExchangeFit fit = fit_exchange(ts, ys);
    pt.g_dynamic = fit.resonant_coupling();
    pt.fit_residual = fit.residual;
    points.push_back(pt);
  }
  return points;
}

}  // namespace tcsim
