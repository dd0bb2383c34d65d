#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "tcsim/calibration.hpp"
#include "tcsim/device.hpp"
#include "tcsim/dynamics.hpp"
#include "tcsim/effective.hpp"
#include "tcsim/error.hpp"

using namespace tcsim;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

const DeviceConfig& bundled_config() {
  static const DeviceConfig c = load_device_config(TCSIM_TEST_DATA "/device.ini");
  return c;
}

const DeviceModel& bundled() {
  static const DeviceModel m(bundled_config());
  return m;
}

// Two identical transmons joined only by a direct capacitance; the coupler
// is disconnected, so the qubits form a two-level exchange system.
DeviceConfig direct_pair(double c24) {
  DeviceConfig c = bundled_config();
  c.q2_squid = c.q1_squid;
  c.network.c04 = c.network.c01;
  c.network.c05 = c.network.c02;
  c.network.c45 = c.network.c12;
  c.network.c23 = 0.0;
  c.network.c34 = 0.0;
  c.network.c24 = c24;
  return c;
}

FluxPulse still(double duration, const std::string& line) {
  FluxPulse p;
  p.duration = duration;
  p.line = line;
  return p;
}

int excitations(int k) { return k / 9 + (k / 3) % 3 + k % 3; }

}  // namespace

TEST_CASE("uncoupled system only accumulates phases") {
  const DeviceModel model(direct_pair(0.0));
  const DeviceParams p = model.idle();
  CHECK(p.g12 == 0.0);
  CHECK(p.g1c == 0.0);
  const double t = 13.7;
  const Propagation prop = propagate(model, still(t, "q2"), still(t, "coupler"));
  const RealMat27 h = build_hamiltonian(p).h;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      const cd expected = i == j ? std::polar(1.0, -2.0 * pi * h(i, i) * t) : cd(0.0);
      CHECK(std::abs(prop.unitary(i, j) - expected) < 1e-9);
    }
  }
}

TEST_CASE("direct exchange follows the Rabi formula") {
  const DeviceModel model(direct_pair(1.0));
  const DeviceParams p = model.idle();
  REQUIRE(p.g12 > 1e-3);
  CHECK(p.g1c == 0.0);
  CHECK(std::abs(p.f1 - p.f2) < 1e-9);
  PropagationOptions opt;
  opt.rwa = true;
  const int from = basis_index(0, 0, 1);
  const int to = basis_index(1, 0, 0);
  const double t_full = 1.0 / (4.0 * p.g12);
  for (double frac : {0.1, 0.37, 0.5, 0.81, 1.0, 1.6}) {
    const double t = frac * t_full;
    const Propagation prop = propagate(model, still(t, "q2"), still(t, "coupler"), opt);
    const double pop = std::norm(prop.unitary(to, from));
    CHECK(pop == doctest::Approx(std::pow(std::sin(2.0 * pi * p.g12 * t), 2)).epsilon(1e-9));
  }
  const Propagation full = propagate(model, still(t_full, "q2"), still(t_full, "coupler"), opt);
  CHECK(std::norm(full.unitary(to, from)) > 1.0 - 1e-9);
}

TEST_CASE("detuned exchange follows the generalized Rabi formula") {
  const DeviceModel model(direct_pair(1.0));
  PropagationOptions opt;
  opt.rwa = true;
  FluxPulse q2 = still(0.0, "q2");
  q2.amplitude = 0.05;  // DC step, no ramp
  const DeviceParams p = model.params(q2.amplitude, 0.0);
  const double delta = p.f2 - p.f1;
  REQUIRE(std::abs(delta) > p.g12);
  const double omega = std::sqrt(p.g12 * p.g12 + 0.25 * delta * delta);
  const double contrast = p.g12 * p.g12 / (omega * omega);
  for (double t : {3.0, 11.0, 27.5}) {
    q2.duration = t;
    const Propagation prop = propagate(model, q2, still(t, "coupler"), opt);
    const double pop = std::norm(prop.unitary(basis_index(1, 0, 0), basis_index(0, 0, 1)));
    CHECK(pop == doctest::Approx(contrast * std::pow(std::sin(2.0 * pi * omega * t), 2)).epsilon(1e-8));
  }
}

TEST_CASE("propagation at the iSWAP point is unitary and converges at second order") {
  const DeviceModel& model = bundled();
  const GateSpec spec = analytic_gate(GateKind::ISwap, model);
  const FluxPulse q2 = spec.q2_pulse();
  const FluxPulse cp = spec.coupler_pulse(model.config().flux_coupler);
  const double period = 1.0 / spec.mod_freq;

  auto run = [&](int m) {
    PropagationOptions opt;
    opt.dt_max = period / m;
    const Propagation p = propagate(model, q2, cp, opt);
    CHECK(p.unitarity_error < 1e-8);
    return p.unitary;
  };
  const CMat27 ref = run(1280);
  const double e1 = (run(80) - ref).cwiseAbs().maxCoeff();
  const double e2 = (run(160) - ref).cwiseAbs().maxCoeff();
  const double e3 = (run(320) - ref).cwiseAbs().maxCoeff();
  MESSAGE("step-halving errors " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.25));

  // Default step: populations move by less than 1e-6 under halving.
  const Propagation coarse = propagate(model, q2, cp);
  PropagationOptions fine;
  fine.dt_max = 0.5 * coarse.dt;
  const Propagation half = propagate(model, q2, cp, fine);
  double dp = 0.0;
  for (int in : {basis_index(1, 0, 0), basis_index(0, 0, 1), basis_index(1, 0, 1)}) {
    const Eigen::VectorXd a = coarse.unitary.col(in).cwiseAbs2();
    const Eigen::VectorXd b = half.unitary.col(in).cwiseAbs2();
    dp = std::max(dp, (a - b).cwiseAbs().maxCoeff());
  }
  MESSAGE("population change under halving " << dp);
  CHECK(dp < 1e-6);
}

TEST_CASE("rotating-wave propagation conserves excitation number") {
  const DeviceModel& model = bundled();
  const GateSpec spec = analytic_gate(GateKind::ISwap, model);
  PropagationOptions opt;
  opt.rwa = true;
  const Propagation p = propagate(model, spec.q2_pulse(), spec.coupler_pulse(model.config().flux_coupler), opt);
  double worst = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      if (excitations(i) != excitations(j)) worst = std::max(worst, std::abs(p.unitary(i, j)));
  CHECK(worst < 1e-12);
}

TEST_CASE("state propagation conserves the norm and matches the unitary") {
  const DeviceModel& model = bundled();
  const GateSpec spec = analytic_gate(GateKind::ISwap, model);
  FluxPulse q2 = spec.q2_pulse();
  FluxPulse cp = spec.coupler_pulse(model.config().flux_coupler);
  q2.duration = cp.duration = 20.0;
  const CVec27 psi0 = CVec27::Unit(basis_index(1, 0, 0));
  const Propagation traj = propagate_state(model, q2, cp, psi0, 50);
  for (const auto& s : traj.states) CHECK(std::abs(s.norm() - 1.0) < 1e-8);
  const Propagation whole = propagate(model, q2, cp);
  CHECK((traj.states.back() - whole.unitary * psi0).norm() < 1e-9);
  CHECK(traj.times.back() == doctest::Approx(20.0));
}

TEST_CASE("propagation argument checks") {
  const DeviceModel& model = bundled();
  FluxPulse q2 = still(10.0, "q2");
  FluxPulse cp = still(12.0, "coupler");
  CHECK_THROWS_AS(propagate(model, q2, cp), Error);
  cp.duration = 10.0;
  cp.mod_freq = 0.1;
  CHECK_THROWS_AS(propagate(model, q2, cp), Error);
  cp.mod_freq = 0.0;
  q2.ramp = 2.0;
  CHECK_THROWS_AS(propagate(model, q2, cp), Error);
}

TEST_CASE("fit recovers a synthetic exchange oscillation") {
  const double g = 0.00568;
  std::vector<double> t, y;
  for (int k = 0; k < 60; ++k) {
    t.push_back(2.5 * k);
    y.push_back(0.5 - 0.5 * std::cos(2.0 * pi * 2.0 * g * t.back()));
  }
  const ExchangeFit fit = fit_exchange(t, y);
  CHECK(fit.g == doctest::Approx(g).epsilon(1e-3));
  CHECK(std::abs(fit.decay) < 1e-6);
  CHECK(fit.amplitude == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.resonant_coupling() == doctest::Approx(g).epsilon(1e-3));

  std::vector<double> damped = y;
  for (std::size_t k = 0; k < t.size(); ++k) damped[k] = 0.5 - 0.5 * std::exp(-0.01 * t[k]) * std::cos(2.0 * pi * 2.0 * g * t[k] + 0.3);
  const ExchangeFit fd = fit_exchange(t, damped);
  CHECK(fd.g == doctest::Approx(g).epsilon(1e-3));
  CHECK(fd.decay == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("fit rejects degenerate series") {
  std::vector<double> t, flat;
  for (int k = 0; k < 20; ++k) {
    t.push_back(k);
    flat.push_back(0.3);
  }
  CHECK_THROWS_AS(fit_exchange(t, flat), Error);
  CHECK_THROWS_AS(fit_exchange({0, 1, 2}, {0, 1, 0}), Error);
}

TEST_CASE("contrast correction removes the generalized-Rabi speed-up") {
  const double g = 0.004;
  const double delta = 0.006;
  const double omega = std::sqrt(g * g + 0.25 * delta * delta);
  std::vector<double> t, y;
  for (int k = 0; k < 80; ++k) {
    t.push_back(1.7 * k);
    y.push_back(g * g / (omega * omega) * std::pow(std::sin(2.0 * pi * omega * t.back()), 2));
  }
  const ExchangeFit fit = fit_exchange(t, y);
  CHECK(fit.g == doctest::Approx(omega).epsilon(1e-4));
  // Contrast 2|A| = (g / omega)^2 gives g_true = omega * g / omega.
  CHECK(fit.resonant_coupling() == doctest::Approx(g).epsilon(1e-4));
}

TEST_CASE("chevron peaks at the dressed resonance amplitude") {
  const DeviceModel& model = bundled();
  const GateSpec spec = analytic_gate(GateKind::ISwap, model);
  const double step = 0.002;
  const ChevronRequest req = chevron_request(model, spec, 3, step, 1, 0.5);
  const ChevronResult res = chevron(model, req);
  REQUIRE(res.population.rows() == 7);
  REQUIRE(res.population.cols() == 3);
  Eigen::Index best = 0;
  res.population.col(1).maxCoeff(&best);
  CHECK(std::abs(best - 3) <= 1);
  CHECK(res.population(best, 1) > 0.98);
  // Fringes fall off on both sides.
  CHECK(res.population(0, 1) < res.population(best, 1));
  CHECK(res.population(6, 1) < res.population(best, 1));
}

TEST_CASE("dynamic coupling agrees with the modulated static coupling") {
  const DeviceModel& model = bundled();
  const auto pts = coupling_vs_bias(model, {-0.30, -0.25});
  for (const auto& pt : pts) {
    MESSAGE("flux " << pt.coupler_flux << " static " << pt.g_static << " dynamic " << pt.g_dynamic);
    CHECK(pt.g_dynamic == doctest::Approx(std::abs(pt.g_static)).epsilon(0.05));
    CHECK(pt.fit_residual < 1e-2);
  }
  CHECK(std::abs(pts[0].g_dynamic) > std::abs(pts[1].g_dynamic));
}
