#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "tcsim/calibration.hpp"
#include "tcsim/device.hpp"
#include "tcsim/error.hpp"
#include "tcsim/spectrum.hpp"

using namespace tcsim;
using std::numbers::pi;

namespace {

const DeviceModel& bundled() {
  static const DeviceModel m(load_device_config(TCSIM_TEST_DATA "/device.ini"));
  return m;
}

// Period average of f01(phi_dc + A sin(2 pi f t)) by the midpoint rule.
double mean_frequency(const TransmonSpec& q2, double phi_dc, double amplitude) {
  const int n = 4096;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double flux = phi_dc + amplitude * std::sin(2.0 * pi * (k + 0.5) / n);
    sum += level_energies(q2, 2.0 * pi * flux).f01;
  }
  return sum / n;
}

DeviceParams iswap_params() {
  const auto& cfg = bundled().config();
  return bundled().params(cfg.flux_q2, cfg.gates.iswap_coupler_flux);
}

DeviceParams cz_params() {
  const auto& cfg = bundled().config();
  return bundled().params(cfg.flux_q2, cfg.gates.cz_coupler_flux);
}

ChevronResult synthetic_chevron(int peak_row, int peak_col) {
  ChevronResult c;
  c.amplitudes = {0.10, 0.11, 0.12, 0.13, 0.14};
  c.durations = {40.0, 42.0, 44.0, 46.0, 48.0};
  c.population = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      c.population(i, j) = 1.0 - 0.01 * ((i - peak_row) * (i - peak_row) + (j - peak_col) * (j - peak_col));
  return c;
}

}  // namespace

TEST_CASE("gate kinds round trip through their names") {
  for (GateKind k : {GateKind::ISwap, GateKind::CZ20, GateKind::CZ02}) CHECK(parse_gate_kind(to_string(k)) == k);
  CHECK(parse_gate_kind("cz") == GateKind::CZ20);
  CHECK_THROWS_AS(parse_gate_kind("swap"), Error);
}

TEST_CASE("resonance amplitudes hit their targets") {
  const DeviceModel& model = bundled();
  const auto& cfg = model.config();
  const DeviceParams p = iswap_params();
  const double a = find_resonance_amplitude(GateKind::ISwap, model.q2(), p, cfg.gates.iswap_mod_freq, cfg.flux_q2);
  CHECK(a > 0.0);
  CHECK(a < 0.5);
  CHECK(std::abs(mean_frequency(model.q2(), cfg.flux_q2, a) - p.f1) < 1e-6);

  const DeviceParams pc = cz_params();
  const double acz = find_resonance_amplitude(GateKind::CZ20, model.q2(), pc, cfg.gates.cz_mod_freq, cfg.flux_q2);
  CHECK(acz > a);
  CHECK(std::abs(mean_frequency(model.q2(), cfg.flux_q2, acz) - (pc.f1 - pc.eta1)) < 1e-6);

  // Dressed targets sit at the exact avoided crossings.
  const double ad = find_resonance_amplitude(GateKind::ISwap, model.q2(), p, cfg.gates.iswap_mod_freq, cfg.flux_q2, true);
  CHECK(std::abs(mean_frequency(model.q2(), cfg.flux_q2, ad) - exact_resonance_f2(p, Exchange::E01)) < 1e-6);
}

TEST_CASE("CZ02 cannot be reached by lowering qubit 2") {
  const DeviceModel& model = bundled();
  const auto& cfg = model.config();
  try {
    find_resonance_amplitude(GateKind::CZ02, model.q2(), cz_params(), cfg.gates.cz_mod_freq, cfg.flux_q2);
    FAIL("CZ02 should be unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(std::string(e.what()).find("resonance unreachable") != std::string::npos);
  }
  CHECK(resonance_target(GateKind::CZ02, cz_params()) > model.q2_frequency(cfg.flux_q2));
}

TEST_CASE("sideband collision map") {
  const DeviceModel& model = bundled();
  const auto& cfg = model.config();
  const DeviceParams p = iswap_params();
  const double a_iswap = find_resonance_amplitude(GateKind::ISwap, model.q2(), p, 0.3, cfg.flux_q2);
  const double a_cz = find_resonance_amplitude(GateKind::CZ20, model.q2(), cz_params(), 0.28, cfg.flux_q2);

  const CollisionMap at_root = sideband_collision_map(p, model.q2(), cfg.flux_q2, {a_iswap});
  CHECK(at_root.iswap[0] < 1e-6);
  CHECK(at_root.cz20[0] == doctest::Approx(p.eta1 / 2.0).epsilon(1e-4));

  std::vector<double> grid;
  const double top = (1.0 + cfg.gates.collision_grid_margin) * std::max(a_iswap, a_cz);
  for (int i = 0; i <= 40; ++i) grid.push_back(top * i / 40.0);
  const CollisionMap m = sideband_collision_map(p, model.q2(), cfg.flux_q2, grid, cfg.gates.guard_band);
  MESSAGE("recommended modulation frequency " << m.recommended << " GHz");
  CHECK(m.recommended >= 0.26);
  CHECK(m.recommended <= 0.30);
  CHECK(m.allows(0.3));
  CHECK_FALSE(m.allows(0.2));
  CHECK_THROWS_AS(sideband_collision_map(p, model.q2(), cfg.flux_q2, {}), Error);
}

TEST_CASE("durations from the effective coupling") {
  CHECK(set_duration(GateKind::ISwap, 0.00568) == doctest::Approx(44.01).epsilon(1e-3));
  CHECK(set_duration(GateKind::CZ20, 0.004032) == doctest::Approx(124.0).epsilon(1e-3));
  CHECK(set_duration(GateKind::ISwap, 0.01) == doctest::Approx(0.5 * set_duration(GateKind::ISwap, 0.005)));
  CHECK_THROWS_AS(set_duration(GateKind::ISwap, 0.0), Error);
}

TEST_CASE("analytic operating points") {
  const DeviceModel& model = bundled();
  const GateSpec iswap = analytic_gate(GateKind::ISwap, model);
  CHECK(iswap.resonance_residual < 1e-6);
  CHECK(iswap.duration == doctest::Approx(44.0).epsilon(0.03));
  CHECK(iswap.mod_freq == model.config().gates.iswap_mod_freq);
  const GateSpec cz = analytic_gate(GateKind::CZ20, model);
  CHECK(cz.resonance_residual < 1e-6);
  CHECK(cz.duration == doctest::Approx(124.0).epsilon(0.03));
  try {
    analytic_gate(GateKind::CZ02, model);
    FAIL("CZ02 should be unreachable");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("resonance: ", 0) == 0);
  }
}

TEST_CASE("gate pulses") {
  GateSpec s;
  s.amplitude = 0.15;
  s.mod_freq = 0.3;
  s.duration = 44.0;
  s.ramp = 5.0;
  s.coupler_flux = -0.3;
  const FluxPulse q2 = s.q2_pulse();
  CHECK(q2.duration == 49.0);
  CHECK(q2.amplitude == 0.15);
  const FluxPulse cp = s.coupler_pulse(-0.1);
  CHECK(cp.phi_dc == -0.1);
  CHECK(cp.phi_dc + cp.amplitude == doctest::Approx(-0.3));
  CHECK(cp.mod_freq == 0.0);
  s.duration = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("chevron refinement") {
  GateSpec s;
  s.amplitude = 0.12;
  s.duration = 44.0;
  const GateSpec r = refine_on_chevron(s, synthetic_chevron(1, 3));
  CHECK(r.amplitude == 0.11);
  CHECK(r.duration == 46.0);
  CHECK_THROWS_AS(refine_on_chevron(s, synthetic_chevron(0, 2)), Error);
  CHECK_THROWS_AS(refine_on_chevron(s, synthetic_chevron(2, 4)), Error);

  // CZ keeps the column closest to its duration, so the duration edge is fine.
  GateSpec cz = s;
  cz.kind = GateKind::CZ20;
  cz.duration = 48.0;
  const GateSpec rc = refine_on_chevron(cz, synthetic_chevron(3, 0));
  CHECK(rc.amplitude == 0.13);
  CHECK(rc.duration == 48.0);

  // Equal maxima resolve to the smaller amplitude.
  ChevronResult tie = synthetic_chevron(2, 2);
  tie.population(3, 2) = tie.population(2, 2);
  CHECK(refine_on_chevron(s, tie).amplitude == 0.12);
}

TEST_CASE("coupler bias for a requested coupling") {
  const DeviceModel& model = bundled();
  const double g = effective_coupling(model, GateKind::ISwap, -0.30, 0.3);
  const double bias = coupler_bias_for_coupling(model, GateKind::ISwap, g, 0.3);
  CHECK(bias == doctest::Approx(-0.30).epsilon(1e-6));
}
