#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "tcsim/circuit.hpp"
#include "tcsim/error.hpp"

using namespace tcsim;
using std::numbers::pi;

namespace {

CapacitanceNetwork paper_like() {
  CapacitanceNetwork n;
  n.c01 = n.c02 = 100.0;
  n.c04 = n.c05 = 100.0;
  n.c03 = 120.0;
  n.c12 = n.c45 = 8.0;
  n.c23 = 5.0;
  n.c34 = 5.0;
  n.c24 = 0.2;
  return n;
}

CapacitanceNetwork random_network(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ground(60.0, 200.0), link(0.0, 12.0);
  CapacitanceNetwork n;
  n.c01 = ground(rng);
  n.c02 = ground(rng);
  n.c03 = ground(rng);
  n.c04 = ground(rng);
  n.c05 = ground(rng);
  n.c12 = link(rng);
  n.c13 = link(rng);
  n.c23 = link(rng);
  n.c24 = link(rng) / 10.0;
  n.c34 = link(rng);
  n.c35 = link(rng);
  n.c45 = link(rng);
  return n;
}

// Maxwell capacitance matrix over nodes 1..5, built edge by edge.
Eigen::Matrix<double, 5, 5> node_matrix(const CapacitanceNetwork& n) {
  Eigen::Matrix<double, 5, 5> c = Eigen::Matrix<double, 5, 5>::Zero();
  auto edge = [&](int a, int b, double v) {
    if (a > 0) c(a - 1, a - 1) += v;
    if (b > 0) c(b - 1, b - 1) += v;
    if (a > 0 && b > 0) {
      c(a - 1, b - 1) -= v;
      c(b - 1, a - 1) -= v;
    }
  };
  edge(0, 1, n.c01);
  edge(0, 2, n.c02);
  edge(0, 3, n.c03);
  edge(0, 4, n.c04);
  edge(0, 5, n.c05);
  edge(1, 2, n.c12);
  edge(1, 3, n.c13);
  edge(2, 3, n.c23);
  edge(2, 4, n.c24);
  edge(3, 4, n.c34);
  edge(3, 5, n.c35);
  edge(4, 5, n.c45);
  return c;
}

// Node fluxes from mode fluxes (1p, 1m, c, 2p, 2m): phi1 = (p - m)/2,
// phi2 = (p + m)/2, phi3 = c, phi4 = (p + m)/2, phi5 = (p - m)/2.
Eigen::Matrix<double, 5, 5> node_from_mode() {
  Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
  j(0, 0) = 0.5, j(0, 1) = -0.5;
  j(1, 0) = 0.5, j(1, 1) = 0.5;
  j(2, 2) = 1.0;
  j(3, 3) = 0.5, j(3, 4) = 0.5;
  j(4, 3) = 0.5, j(4, 4) = -0.5;
  return j;
}

}  // namespace

TEST_CASE("charging constant follows from e and h") {
  const double direct = 1.602176634e-19 * 1.602176634e-19 / (2.0 * 6.62607015e-34) / 1e-15 / 1e9;
  CHECK(kChargingConstant == doctest::Approx(direct).epsilon(1e-14));
  CHECK(kChargingConstant == doctest::Approx(19.3702).epsilon(1e-5));
  CHECK(kChargingConstant / 100.0 == doctest::Approx(0.194).epsilon(0.01));
}

TEST_CASE("squid energy limits") {
  const SquidSpec s{3.0, 7.0};
  const auto at0 = squid_energy(s, 0.0);
  CHECK(at0.ej == doctest::Approx(10.0));
  CHECK(at0.phi0 == doctest::Approx(0.0));

  const SquidSpec sym{4.0, 4.0};
  for (double phi : {0.3, 1.1, 2.5, 4.0, -2.0}) {
    const auto e = squid_energy(sym, phi);
    CHECK(e.ej == doctest::Approx(8.0 * std::abs(std::cos(phi / 2.0))));
    CHECK(e.phi0 == 0.0);
  }
}

TEST_CASE("squid energy reproduces the two-junction potential") {
  // ejs cos(x) + ejl cos(x - phi_e) must equal ej cos(x - shift) for one shift.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 20.0), ph(-pi, pi);
  for (int trial = 0; trial < 50; ++trial) {
    const SquidSpec s{u(rng), u(rng)};
    const double phi_e = ph(rng);
    const auto e = squid_energy(s, phi_e);
    // Amplitude of the sum of two cosines, independently.
    const std::complex<double> phasor = s.ejs + s.ejl * std::polar(1.0, phi_e);
    CHECK(e.ej == doctest::Approx(std::abs(phasor)).epsilon(1e-12));
    CHECK(e.ej >= std::abs(s.ejl - s.ejs) - 1e-12);
    CHECK(e.ej <= s.ejs + s.ejl + 1e-12);
    CHECK(squid_energy(s, phi_e + 2.0 * pi).ej == doctest::Approx(e.ej).epsilon(1e-12));
    CHECK(squid_energy(s, -phi_e).ej == doctest::Approx(e.ej).epsilon(1e-12));
    // Shift relative to the half-flux symmetric gauge.
    const double expected = std::atan((s.ejs - s.ejl) / (s.ejs + s.ejl) * std::tan(phi_e / 2.0));
    CHECK(std::abs(std::remainder(e.phi0 - expected, pi)) < 1e-10);
  }
}

TEST_CASE("mode capacitance matrix matches the node-basis transformation") {
  std::mt19937_64 rng(5);
  const auto j = node_from_mode();
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = random_network(rng);
    const Eigen::Matrix<double, 5, 5> m = mode_capacitance_matrix(net);
    const Eigen::Matrix<double, 5, 5> oracle = j.transpose() * node_matrix(net) * j;
    CHECK((m - oracle).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m == m.transpose());
  }
}

TEST_CASE("grounded pads only") {
  CapacitanceNetwork n;
  n.c01 = n.c02 = 100.0;
  const auto m = mode_capacitance_matrix(n);
  CHECK(m(kMode1p, kMode1p) * 4.0 == doctest::Approx(200.0));
  CHECK(m(kMode1p, kMode1m) == doctest::Approx(0.0));
}

TEST_CASE("paper-like network has two near-free modes") {
  const auto m = mode_capacitance_matrix(paper_like());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(m);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("exact charging energies equal the inverse of the dynamical block") {
  std::mt19937_64 rng(9);
  const auto j = node_from_mode();
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_network(rng);
    const Eigen::Matrix<double, 5, 5> full = j.transpose() * node_matrix(net) * j;
    Eigen::Matrix3d block;
    const int keep[3] = {1, 2, 4};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) block(a, b) = full(keep[a], keep[b]);
    }
    const Eigen::Matrix3d inv = block.inverse();
    // H = Q^T C^-1 Q / 2 with Q = 2 e n, energies over h in GHz.
    const double e2_over_h = 2.0 * kChargingConstant;
    const auto e = energies_from_network(net).exact;
    CHECK(4.0 * e.ec1 == doctest::Approx(2.0 * e2_over_h * inv(0, 0)).epsilon(1e-12));
    CHECK(4.0 * e.ecc == doctest::Approx(2.0 * e2_over_h * inv(1, 1)).epsilon(1e-12));
    CHECK(4.0 * e.ec2 == doctest::Approx(2.0 * e2_over_h * inv(2, 2)).epsilon(1e-12));
    CHECK(4.0 * e.e1c == doctest::Approx(4.0 * e2_over_h * inv(0, 1)).epsilon(1e-12));
    CHECK(4.0 * e.e12 == doctest::Approx(4.0 * e2_over_h * inv(0, 2)).epsilon(1e-12));
  }
}

TEST_CASE("approximate direct coupling without c24") {
  auto net = paper_like();
  net.c24 = 0.0;
  const auto a = energies_from_network(net).approximate;
  const auto m = mode_capacitance_matrix(net);
  const double c1 = m(kMode1m, kMode1m), c2 = m(kMode2m, kMode2m), cc = m(kModeC, kModeC);
  CHECK(a.e12 == doctest::Approx(2.0 * kChargingConstant * net.c23 * net.c34 / (4.0 * c1 * c2 * cc)));
}

TEST_CASE("exact and approximate paths agree for weak coupling") {
  const auto e = energies_from_network(paper_like());
  CHECK(e.exact.e12 == doctest::Approx(e.approximate.e12).epsilon(0.10));
  CHECK(e.exact.e1c == doctest::Approx(e.approximate.e1c).epsilon(0.10));
}

TEST_CASE("approximate path converges as coupling capacitances shrink") {
  double previous = 1e9;
  for (double eps : {0.1, 0.01, 0.001}) {
    auto net = paper_like();
    net.c23 = 50.0 * eps;
    net.c34 = 50.0 * eps;
    net.c24 = 2.0 * eps;
    const auto e = energies_from_network(net);
    const double dev = std::abs(e.exact.e1c / e.approximate.e1c - 1.0) +
                       std::abs(e.exact.e12 / e.approximate.e12 - 1.0);
    CHECK(dev < previous);
    previous = dev;
  }
  CHECK(previous < 1e-2);
}

TEST_CASE("energies scale inversely with capacitance") {
  const auto net = paper_like();
  const auto a = energies_from_network(net).exact;
  const auto b = energies_from_network(net.scaled(2.5)).exact;
  CHECK(b.ec1 * 2.5 == doctest::Approx(a.ec1).epsilon(1e-12));
  CHECK(b.e2c * 2.5 == doctest::Approx(a.e2c).epsilon(1e-12));
  CHECK(b.e12 * 2.5 == doctest::Approx(a.e12).epsilon(1e-12));
}

TEST_CASE("invalid networks are rejected") {
  CHECK_THROWS_WITH_AS(energies_from_network(CapacitanceNetwork{}), "degenerate capacitance network", Error);
  auto net = paper_like();
  net.c23 = -1.0;
  CHECK_THROWS_AS(net.validate(), Error);
}
