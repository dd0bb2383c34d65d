#include "tcsim/spectrum.hpp"

#include <cmath>
#include <unsupported/Eigen/NonLinearOptimization>

#include "tcsim/error.hpp"

namespace tcsim {

void TransmonSpec::validate() const {
  if (!(ec > 0.0) || !std::isfinite(ec)) {
    fail(ErrorCode::InvalidArgument, label + ": charging energy must be positive");
  }
  squid.validate();
}

bool TransmonSpec::transmon_regime() const { return (squid.ejs + squid.ejl) / ec >= 20.0; }

Levels levels_from_ej(double ec, double ej, bool harmonic) {
  if (!(ej > 0.0)) fail(ErrorCode::Numeric, "vanishing Josephson energy");
  const double xi = harmonic ? 0.0 : std::sqrt(2.0 * ec / ej);
  const double omega = std::sqrt(8.0 * ej * ec) - ec * (1.0 + xi / 4.0);
  const double a = omega + 0.5 * ec * (1.0 + xi / 4.0);
  const double b = 0.5 * ec * (1.0 + 9.0 * xi / 16.0);
  auto energy = [&](double n) { return (a - b * n) * n; };
  Levels l;
  l.e0 = energy(0.0);
  l.e1 = energy(1.0);
  l.e2 = energy(2.0);
  l.f01 = l.e1 - l.e0;
  l.eta = l.f01 - (l.e2 - l.e1);
  return l;
}

Levels level_energies(const TransmonSpec& spec, double phi_e, bool harmonic) {
  return levels_from_ej(spec.ec, squid_energy(spec.squid, phi_e).ej, harmonic);
}

ZeroPoint zero_point(const TransmonSpec& spec, double phi_e) {
  const double ej = squid_energy(spec.squid, phi_e).ej;
  if (!(ej > 0.0)) fail(ErrorCode::Numeric, "vanishing Josephson energy");
  const double r = std::pow(ej / (8.0 * spec.ec), 0.25);
  return {r / std::sqrt(2.0), 1.0 / (r * std::sqrt(2.0))};
}

double coupling_g(double e_coupling, double ej_a, double ec_a, double ej_b, double ec_b,
                  bool harmonic) {
  if (!(ej_a > 0.0) || !(ej_b > 0.0)) fail(ErrorCode::Numeric, "vanishing Josephson energy");
  const double xa = harmonic ? 0.0 : std::sqrt(2.0 * ec_a / ej_a);
  const double xb = harmonic ? 0.0 : std::sqrt(2.0 * ec_b / ej_b);
  return e_coupling / std::sqrt(2.0) * std::pow(ej_a / ec_a * ej_b / ec_b, 0.25) *
         (1.0 - (xa + xb) / 8.0);
}

Couplings coupling_strengths(const ChargingEnergies& e, const TransmonSpec& q1,
                             const TransmonSpec& q2, const TransmonSpec& coupler,
                             const FluxBias& phases, bool harmonic) {
  if (!std::isfinite(e.e1c) || !std::isfinite(e.e2c) || !std::isfinite(e.e12)) {
    fail(ErrorCode::InvalidArgument, "coupling energies must be finite");
  }
  const double ej1 = squid_energy(q1.squid, phases.q1).ej;
  const double ej2 = squid_energy(q2.squid, phases.q2).ej;
  const double ejc = squid_energy(coupler.squid, phases.coupler).ej;
  Couplings g;
  g.g1c = coupling_g(e.e1c, ej1, q1.ec, ejc, coupler.ec, harmonic);
  g.g2c = coupling_g(e.e2c, ej2, q2.ec, ejc, coupler.ec, harmonic);
  g.g12 = coupling_g(e.e12, ej1, q1.ec, ej2, q2.ec, harmonic);
  return g;
}

std::vector<double> frequency_vs_flux(const TransmonSpec& spec, const std::vector<double>& phi_e) {
  if (phi_e.empty()) fail(ErrorCode::InvalidArgument, "flux grid is empty");
  std::vector<double> out;
  out.reserve(phi_e.size());
  for (double p : phi_e) out.push_back(level_energies(spec, p).f01);
  return out;
}

namespace {

struct SquidFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  double ec;
  const std::vector<double>& phi;
  const std::vector<double>& f;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(phi.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const SquidSpec s{std::abs(x[0]), std::abs(x[1])};
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double ej = squid_energy(s, phi[i]).ej;
      r[static_cast<Eigen::Index>(i)] = ej > 0.0 ? levels_from_ej(ec, ej).f01 - f[i] : 1e3;
    }
    return 0;
  }
};

}  // namespace

SquidFit fit_squid(double ec, const std::vector<double>& phi_e, const std::vector<double>& f01,
                   SquidSpec guess) {
  if (phi_e.size() != f01.size() || phi_e.size() < 3) {
    fail(ErrorCode::InvalidArgument, "fit_squid needs at least three matched samples");
  }
  guess.validate();
  SquidFunctor functor{ec, phi_e, f01};
  Eigen::NumericalDiff<SquidFunctor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<SquidFunctor>> lm(numdiff);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  Eigen::VectorXd x(2);
  x << guess.ejs, guess.ejl;
  lm.minimize(x);

  SquidFit out;
  const double a = std::abs(x[0]);
  const double b = std::abs(x[1]);
  out.squid = {std::min(a, b), std::max(a, b)};
  Eigen::VectorXd r(functor.values());
  functor(x, r);
  out.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  return out;
}

}  // namespace tcsim
