#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tcsim {

/// Flat-top flux pulse with raised-cosine ramps. With mod_freq > 0 the
/// envelope multiplies a sinusoid; with mod_freq == 0 it is a fast DC step.
/// Flux in Phi0, time in ns, frequency in GHz.
struct FluxPulse {
  double phi_dc = 0.0;
  double amplitude = 0.0;
  double mod_freq = 0.0;
  double phase = 0.0;
  double duration = 0.0;
  double ramp = 0.0;
  std::string line;

  void validate() const;
  /// Envelope u(t) in [0, 1].
  double envelope(double t) const;
  /// Flux without range checks; phi_dc outside [0, duration].
  double flux_at(double t) const;
};

/// Flux at time t in [0, duration]; throws outside the pulse window.
double instantaneous_flux(const FluxPulse& pulse, double t);

struct CrosstalkMatrix {
  Eigen::MatrixXd c;
  std::vector<std::string> labels;

  void validate() const;
  double condition_number() const;
};

/// Source settings x with C x = target.
Eigen::VectorXd compensate_crosstalk(const CrosstalkMatrix& m, const Eigen::VectorXd& target);

/// C_ij = sign_ij * I_i / I_ij, where I_i is the period of loop i under its own
/// line and I_ij its period under line j (infinite when line j has no effect).
CrosstalkMatrix crosstalk_from_periods(const Eigen::VectorXd& ref_periods,
                                       const Eigen::MatrixXd& cross_periods,
                                       const Eigen::MatrixXd& signs,
                                       std::vector<std::string> labels = {});

/// Periods observed when the loops see flux `matrix * x` per unit source x
/// (row-normalized by the diagonal): the forward model of the measurement.
Eigen::MatrixXd periods_from_matrix(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& ref_periods);

CrosstalkMatrix load_crosstalk_csv(const std::string& path);
std::string crosstalk_to_csv(const CrosstalkMatrix& m);

struct TransferTable {
  std::vector<double> freq;   // GHz, strictly increasing
  std::vector<double> ratio;  // achieved / requested amplitude

  void validate() const;
};

double apply_transfer(const TransferTable& table, double requested_amp, double mod_freq);

TransferTable load_transfer_csv(const std::string& path);

}  // namespace tcsim
