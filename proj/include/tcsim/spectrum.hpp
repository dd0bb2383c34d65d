#pragma once

#include <string>
#include <vector>

#include "tcsim/circuit.hpp"

namespace tcsim {

struct TransmonSpec {
  double ec = 0.0;  // GHz
  SquidSpec squid;
  std::string label;  // q1 | q2 | coupler

  void validate() const;
  /// EJ(0)/EC >= 20; outside this the perturbative level formulas degrade.
  bool transmon_regime() const;
};

struct Levels {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double f01 = 0.0;
  double eta = 0.0;  // positive magnitude
};

/// Sixth-order expansion of the transmon levels; `harmonic` sets xi = 0.
Levels levels_from_ej(double ec, double ej, bool harmonic = false);
Levels level_energies(const TransmonSpec& spec, double phi_e, bool harmonic = false);

struct ZeroPoint {
  double n_zpf = 0.0;
  double phi_zpf = 0.0;
};

ZeroPoint zero_point(const TransmonSpec& spec, double phi_e);

/// g = (E/sqrt 2) (EJa/ECa * EJb/ECb)^(1/4) [1 - (xi_a + xi_b)/8].
double coupling_g(double e_coupling, double ej_a, double ec_a, double ej_b, double ec_b,
                  bool harmonic = false);

struct Couplings {
  double g1c = 0.0;
  double g2c = 0.0;
  double g12 = 0.0;
};

struct FluxBias {
  double q1 = 0.0;  // external phases, rad
  double q2 = 0.0;
  double coupler = 0.0;
};

Couplings coupling_strengths(const ChargingEnergies& e, const TransmonSpec& q1,
                             const TransmonSpec& q2, const TransmonSpec& coupler,
                             const FluxBias& phases, bool harmonic = false);

std::vector<double> frequency_vs_flux(const TransmonSpec& spec, const std::vector<double>& phi_e);

struct SquidFit {
  SquidSpec squid;
  double rms_residual = 0.0;  // GHz
};

/// Least-squares fit of (ejs, ejl) to measured f01(phi_e) at known EC. The
/// returned spec has ejs <= ejl; the curve is invariant under swapping them.
SquidFit fit_squid(double ec, const std::vector<double>& phi_e, const std::vector<double>& f01,
                   SquidSpec guess);

}  // namespace tcsim
