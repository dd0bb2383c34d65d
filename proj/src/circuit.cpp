#include "tcsim/circuit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tcsim/error.hpp"

namespace tcsim {

void CapacitanceNetwork::validate() const {
  const double values[] = {c01, c02, c03, c04, c05, c12, c13, c23, c24, c34, c35, c45};
  for (double c : values) {
    if (!std::isfinite(c) || c < 0.0) {
      fail(ErrorCode::InvalidArgument, "capacitances must be finite and non-negative");
    }
  }
}

CapacitanceNetwork CapacitanceNetwork::scaled(double factor) const {
  CapacitanceNetwork out = *this;
  for (double* c : {&out.c01, &out.c02, &out.c03, &out.c04, &out.c05, &out.c12, &out.c13,
                    &out.c23, &out.c24, &out.c34, &out.c35, &out.c45}) {
    *c *= factor;
  }
  return out;
}

void SquidSpec::validate() const {
  if (!(ejs > 0.0) || !(ejl > 0.0) || !std::isfinite(ejs) || !std::isfinite(ejl)) {
    fail(ErrorCode::InvalidArgument, "SQUID junction energies must be positive");
  }
}

SquidEnergy squid_energy(const SquidSpec& spec, double phi_e) {
  const double s = spec.ejs;
  const double l = spec.ejl;
  // Clamp tiny negative round-off at full frustration of a symmetric loop.
  const double ej2 = s * s + l * l + 2.0 * s * l * std::cos(phi_e);
  const double ej = std::sqrt(std::max(ej2, 0.0));

  const double half = 0.5 * phi_e;
  const double c = std::cos(half);
  const double ratio = (s - l) / (s + l);
  double phi0;
  if (ratio == 0.0) {
    phi0 = 0.0;
  } else if (std::abs(c) < 1e-15) {
    phi0 = std::copysign(std::numbers::pi / 2.0, ratio * std::sin(half));
  } else {
    phi0 = std::atan(ratio * std::tan(half));
  }
  return {ej, phi0};
}

Eigen::Matrix<double, 5, 5> mode_capacitance_matrix(const CapacitanceNetwork& n) {
  const double c1p = n.c02 + n.c23 + n.c24 + (n.c01 + n.c13);
  const double c1m = n.c02 + n.c23 + n.c24 - (n.c01 + n.c13);
  const double c2p = n.c04 + n.c34 + n.c24 + (n.c05 + n.c35);
  const double c2m = n.c04 + n.c34 + n.c24 - (n.c05 + n.c35);
  const double ccp = n.c03 + n.c13 + n.c23 + n.c34 + n.c35;

  Eigen::Matrix<double, 5, 5> m;
  // clang-format off
  m << c1p,                    c1m,                    -2.0 * (n.c13 + n.c23), -n.c24,                 -n.c24,
       c1m,                    c1p + 4.0 * n.c12,      -2.0 * (n.c23 - n.c13), -n.c24,                 -n.c24,
       -2.0 * (n.c13 + n.c23), -2.0 * (n.c23 - n.c13), 4.0 * ccp,              -2.0 * (n.c34 + n.c35), -2.0 * (n.c34 - n.c35),
       -n.c24,                 -n.c24,                 -2.0 * (n.c34 + n.c35), c2p,                    c2m,
       -n.c24,                 -n.c24,                 -2.0 * (n.c34 - n.c35), c2m,                    c2p + 4.0 * n.c45;
  // clang-format on
  // The (2m, 1m) entry follows from Phi_2m = Phi_4 - Phi_5 and Phi_1m = Phi_2 - Phi_1:
  // only the C24 branch links them, giving -C24 / 4 on both sides of the diagonal.
  return m / 4.0;
}

NetworkEnergies energies_from_network(const CapacitanceNetwork& net) {
  net.validate();
  const Eigen::Matrix<double, 5, 5> full = mode_capacitance_matrix(net);

  // Free modes 1p and 2p carry no inductance; drop them and keep (1m, c, 2m).
  const int keep[3] = {kMode1m, kModeC, kMode2m};
  Eigen::Matrix3d block;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) block(i, j) = full(keep[i], keep[j]);
  }

  Eigen::LLT<Eigen::Matrix3d> llt(block);
  const double scale = block.cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || scale == 0.0 ||
      block.determinant() <= 1e-12 * scale * scale * scale) {
    fail(ErrorCode::InvalidArgument, "degenerate capacitance network");
  }
  const Eigen::Matrix3d inv = llt.solve(Eigen::Matrix3d::Identity());

  // H = (1/2) Q^T C^-1 Q with Q = 2e n: 4 E_Ck = 2 e^2 Cinv_kk and 4 E_kl = 4 e^2 Cinv_kl.
  const double k = kChargingConstant;  // e^2 / 2h
  NetworkEnergies out;
  out.exact.ec1 = k * inv(0, 0);
  out.exact.ecc = k * inv(1, 1);
  out.exact.ec2 = k * inv(2, 2);
  out.exact.e1c = 2.0 * k * inv(0, 1);
  out.exact.e2c = 2.0 * k * inv(2, 1);
  out.exact.e12 = 2.0 * k * inv(0, 2);

  const double csum1 = full(kMode1m, kMode1m);
  const double csum2 = full(kMode2m, kMode2m);
  const double ccp = full(kModeC, kModeC);
  const double e2 = 2.0 * k;  // e^2 / h
  out.approximate.ec1 = k / csum1;
  out.approximate.ec2 = k / csum2;
  out.approximate.ecc = k / ccp;
  out.approximate.e1c = e2 * net.c23 / (2.0 * ccp * csum1);
  out.approximate.e2c = e2 * net.c34 / (2.0 * ccp * csum2);
  out.approximate.e12 =
      e2 / (4.0 * csum1 * csum2 * ccp) * (net.c23 * net.c34 + net.c24 * ccp);
  return out;
}

}  // namespace tcsim
