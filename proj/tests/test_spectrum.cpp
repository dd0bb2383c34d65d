#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "tcsim/device.hpp"
#include "tcsim/error.hpp"
#include "tcsim/spectrum.hpp"

using namespace tcsim;
using std::numbers::pi;

namespace {

// Lowest three levels of 4 EC n^2 - EJ cos(phi) in a charge basis |n| <= cutoff.
Eigen::Vector3d charge_basis_levels(double ec, double ej, int cutoff = 15) {
  const int dim = 2 * cutoff + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double n = i - cutoff;
    h(i, i) = 4.0 * ec * n * n;
    if (i + 1 < dim) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return es.eigenvalues().head<3>();
}

}  // namespace

TEST_CASE("harmonic limit") {
  const auto l = levels_from_ej(0.2, 12.0, true);
  CHECK(l.f01 == doctest::Approx(std::sqrt(8.0 * 12.0 * 0.2) - 0.2));
  CHECK(l.eta == doctest::Approx(0.2));
}

TEST_CASE("level formula against exact charge-basis diagonalization") {
  const double ec = 0.2;
  for (double ratio : {50.0, 80.0, 120.0}) {
    const double ej = ratio * ec;
    const Eigen::Vector3d e = charge_basis_levels(ec, ej, 30);
    const double f01 = e(1) - e(0);
    const double eta = f01 - (e(2) - e(1));
    const auto l = levels_from_ej(ec, ej);
    CHECK(l.f01 == doctest::Approx(f01).epsilon(2e-3));
    CHECK(l.eta == doctest::Approx(eta).epsilon(0.03));
    // The xi corrections move the result toward the exact value.
    const auto h = levels_from_ej(ec, ej, true);
    CHECK(std::abs(l.f01 - f01) < std::abs(h.f01 - f01));
  }
}

TEST_CASE("charge basis is converged at 15 levels") {
  const Eigen::Vector3d a = charge_basis_levels(0.2, 10.0, 15);
  const Eigen::Vector3d b = charge_basis_levels(0.2, 10.0, 40);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("vanishing Josephson energy") {
  TransmonSpec t{0.2, {5.0, 5.0}, "coupler"};
  CHECK_THROWS_WITH_AS(level_energies(t, pi), "vanishing Josephson energy", Error);
  CHECK_THROWS_AS(zero_point(t, pi), Error);
}

TEST_CASE("zero-point fluctuations") {
  TransmonSpec t{0.25, {1.0, 1.0}, "q1"};  // EJ = 2 = 8 EC
  const auto z = zero_point(t, 0.0);
  CHECK(z.n_zpf == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(z.phi_zpf == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  TransmonSpec t50{0.2, {5.0, 5.0}, "q2"};  // EJ / EC = 50
  // (50 / 8)^(1/4) / sqrt(2) = 1.1180
  CHECK(zero_point(t50, 0.0).n_zpf == doctest::Approx(std::pow(6.25, 0.25) / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(zero_point(t50, 0.0).n_zpf == doctest::Approx(1.118).epsilon(1e-3));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ec(0.05, 0.5), ej(1.0, 40.0), ph(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    TransmonSpec r{ec(rng), {ej(rng), ej(rng)}, "q"};
    const auto zr = zero_point(r, ph(rng));
    CHECK(zr.n_zpf * zr.phi_zpf == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("coupling formula collapses without corrections") {
  const double g = coupling_g(0.01, 15.0, 0.2, 15.0, 0.2, true);
  // Equal qubits: g = E / sqrt(2) * (EJ / EC)^(1/2).
  CHECK(g == doctest::Approx(0.01 / std::sqrt(2.0) * std::sqrt(75.0)));
  // Monotone in the coupling energy.
  CHECK(coupling_g(0.02, 15.0, 0.2, 20.0, 0.2) > coupling_g(0.01, 15.0, 0.2, 20.0, 0.2));
}

TEST_CASE("coupler-flux dependence of g1c follows EJc^(1/4)") {
  const DeviceModel m(load_device_config(TCSIM_TEST_DATA "/device.ini"));
  const auto& e = m.energies();
  const FluxBias a{0.0, 0.0, 0.0};
  const FluxBias b{0.0, 0.0, 2.0 * pi * 0.2};
  const auto ga = coupling_strengths(e, m.q1(), m.q2(), m.coupler(), a);
  const auto gb = coupling_strengths(e, m.q1(), m.q2(), m.coupler(), b);
  const double eja = squid_energy(m.coupler().squid, a.coupler).ej;
  const double ejb = squid_energy(m.coupler().squid, b.coupler).ej;
  const double ej1 = squid_energy(m.q1().squid, 0.0).ej;
  const double xi = [&](double ej) { return std::sqrt(2.0 * m.coupler().ec / ej); }(eja);
  const double xib = std::sqrt(2.0 * m.coupler().ec / ejb);
  const double xi1 = std::sqrt(2.0 * m.q1().ec / ej1);
  const double expected = std::pow(ejb / eja, 0.25) * (1.0 - (xib + xi1) / 8.0) / (1.0 - (xi + xi1) / 8.0);
  CHECK(gb.g1c / ga.g1c == doctest::Approx(expected).epsilon(1e-12));
  CHECK(gb.g1c < ga.g1c);
}

TEST_CASE("bundled device reproduces the measured parameters") {
  const DeviceModel m(load_device_config(TCSIM_TEST_DATA "/device.ini"));
  const auto p = m.idle();
  CHECK(p.f1 == doctest::Approx(3.803).epsilon(1e-3));
  CHECK(p.f2 == doctest::Approx(3.862).epsilon(1e-3));
  CHECK(p.fc == doctest::Approx(5.915).epsilon(1e-3));
  CHECK(p.eta1 == doctest::Approx(0.235).epsilon(0.01));
  CHECK(p.eta2 == doctest::Approx(0.233).epsilon(0.01));
  CHECK(std::sqrt(p.g1c * p.g2c) * 1e3 == doctest::Approx(92.3).epsilon(1e-3));
  CHECK(p.g12 * 1e3 == doctest::Approx(4.7).epsilon(1e-3));
  // Minimum frequencies at half flux.
  CHECK(level_energies(m.q1(), pi).f01 == doctest::Approx(3.173).epsilon(1e-3));
  CHECK(level_energies(m.q2(), pi).f01 == doctest::Approx(3.207).epsilon(1e-3));
}

TEST_CASE("frequency versus flux is maximal at zero and monotone on [0, pi] for a symmetric loop") {
  TransmonSpec c{0.2, {18.0, 18.0}, "coupler"};
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.95 * pi * i / 40.0);
  const auto f = frequency_vs_flux(c, grid);
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] < f[i - 1]);
}

TEST_CASE("anharmonicity is positive and smooth in flux") {
  const DeviceModel m(load_device_config(TCSIM_TEST_DATA "/device.ini"));
  double prev = level_energies(m.q2(), 0.0).eta;
  for (int i = 1; i <= 50; ++i) {
    const double phi = pi * i / 50.0;
    const double eta = level_energies(m.q2(), phi).eta;
    CHECK(eta > 0.0);
    CHECK(std::abs(eta - prev) < 0.01);
    prev = eta;
  }
}

TEST_CASE("SQUID fit recovers junction energies from noisy data") {
  const double ec = 0.21;
  const SquidSpec truth{1.5, 8.4};
  TransmonSpec t{ec, truth, "q"};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 5e-4);
  std::vector<double> phi, f;
  for (int i = 0; i <= 60; ++i) {
    phi.push_back(-pi + 2.0 * pi * i / 60.0);
    f.push_back(level_energies(t, phi.back()).f01 + noise(rng));
  }
  const auto fit = fit_squid(ec, phi, f, {1.0, 7.0});
  CHECK(fit.squid.ejs == doctest::Approx(truth.ejs).epsilon(0.01));
  CHECK(fit.squid.ejl == doctest::Approx(truth.ejl).epsilon(0.01));
  CHECK(fit.rms_residual < 2e-3);
}
