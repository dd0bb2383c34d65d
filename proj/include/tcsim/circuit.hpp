#pragma once

#include <Eigen/Dense>

namespace tcsim {

/// Elementary charge and Planck constant (CODATA 2018, exact SI values).
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s

/// e^2 / (2h) expressed in GHz * fF, so E_C/h [GHz] = kChargingConstant / C [fF].
/// 1 F Hz = 1e15 fF * 1e-9 GHz, hence the factor 1e6.
inline constexpr double kChargingConstant =
    kElementaryCharge * kElementaryCharge / (2.0 * kPlanck) * 1e6;  // 19.3698...

/// Lumped capacitances (fF) between the five circuit nodes and ground (node 0).
/// Nodes 1 and 2 are the pads of qubit 1, node 3 the grounded coupler, nodes 4
/// and 5 the pads of qubit 2.
struct CapacitanceNetwork {
  double c01 = 0.0;
  double c02 = 0.0;
  double c03 = 0.0;
  double c04 = 0.0;
  double c05 = 0.0;
  double c12 = 0.0;
  double c13 = 0.0;
  double c23 = 0.0;
  double c24 = 0.0;
  double c34 = 0.0;
  double c35 = 0.0;
  double c45 = 0.0;

  /// Throws if any capacitance is negative or not finite.
  void validate() const;

  CapacitanceNetwork scaled(double factor) const;
};

/// Two-junction SQUID, Josephson energies in GHz.
struct SquidSpec {
  double ejs = 0.0;
  double ejl = 0.0;

  bool symmetric() const { return ejs == ejl; }
  void validate() const;
};

struct SquidEnergy {
  double ej;    // GHz
  double phi0;  // rad, phase offset of the effective junction
};

/// Effective Josephson energy of the loop at external phase `phi_e` (rad).
SquidEnergy squid_energy(const SquidSpec& spec, double phi_e);

/// Mode ordering of `mode_capacitance_matrix`.
enum ModeIndex : int { kMode1p = 0, kMode1m = 1, kModeC = 2, kMode2p = 3, kMode2m = 4 };

/// Capacitance matrix in the (1p, 1m, c, 2p, 2m) mode basis, Q = C dPhi/dt.
Eigen::Matrix<double, 5, 5> mode_capacitance_matrix(const CapacitanceNetwork& net);

/// Charging (E_C) and charge-coupling energies in GHz, using the convention
/// H = 4 E_C1 n1^2 + ... + 4 E_1c n1 nc + 4 E_2c n2 nc + 4 E_12 n1 n2.
struct ChargingEnergies {
  double ec1 = 0.0;
  double ec2 = 0.0;
  double ecc = 0.0;
  double e1c = 0.0;
  double e2c = 0.0;
  double e12 = 0.0;
};

struct NetworkEnergies {
  ChargingEnergies exact;        // inverse of the dynamical 3x3 block
  ChargingEnergies approximate;  // weak-coupling closed forms
};

/// Throws "degenerate capacitance network" when the (1m, c, 2m) block is singular.
NetworkEnergies energies_from_network(const CapacitanceNetwork& net);

}  // namespace tcsim
