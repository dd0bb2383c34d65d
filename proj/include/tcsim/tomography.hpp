#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>

#include "tcsim/device.hpp"
#include "tcsim/effective.hpp"

namespace tcsim {

using Mat4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using Basis27x4 = Eigen::Matrix<std::complex<double>, kDim, 4>;
using Ptm = Eigen::Matrix<double, 16, 16>;

// Two-qubit states are ordered |00>, |01>, |10>, |11> with qubit 1 first.
// Pauli index k = 4 a + b stands for P_a (x) P_b, with P = I, X, Y, Z.
Mat4c two_qubit_pauli(int k);
std::string pauli_label(int k);

Mat4c fsim(double theta, double phi);
Mat4c iswap_ideal();
Mat4c cz_ideal();

struct ProcessTensor {
  Ptm r = Ptm::Identity();
  double leakage = 0.0;  // 1 - Tr(V^dag V) / 4 of the projected map

  bool trace_preserving(double tol = 1e-9) const;
};

/// Restriction of a 27-level unitary to the span of `basis` (coupler in its
/// ground state): V = B^dag U B.
Mat4c project(const CMat27& u, const Basis27x4& basis);
Basis27x4 bare_basis();

ProcessTensor ptm_from_operator(const Mat4c& v);
ProcessTensor qubit_subspace_ptm(const CMat27& u);
ProcessTensor qubit_subspace_ptm(const CMat27& u, const Basis27x4& basis);

/// diag(1, e^{i z2}, e^{i z1}, e^{i (z1 + z2)}), i.e. Rz(z1) (x) Rz(z2) up to a
/// global phase.
Mat4c virtual_z(double z1, double z2);
Mat4c virtual_z_correct(const Mat4c& v, double z1, double z2);
ProcessTensor virtual_z_correct(const ProcessTensor& p, double z1, double z2);

struct VirtualZ {
  double z1 = 0.0;
  double z2 = 0.0;
};

/// Angles maximizing |Tr(target^dag D(z1, z2) V)|, applied after the gate.
VirtualZ extract_virtual_z(const Mat4c& v, const Mat4c& target);

/// F_avg = (4 F_pro + 1) / 5 with F_pro = Tr(ideal^T ptm) / 16.
double process_fidelity(const ProcessTensor& ptm, const ProcessTensor& ideal);
double average_fidelity(const ProcessTensor& ptm, const ProcessTensor& ideal);

/// Tr(R^T R) / 16 over the full PTM; 1 for unitary channels.
double unitarity(const ProcessTensor& ptm);

struct FSimFit {
  double theta = 0.0;
  double phi = 0.0;
  double fidelity_to_fit = 0.0;  // average fidelity
  std::string warning;
};

FSimFit fit_fsim(const ProcessTensor& ptm);

double phase_error(double delta_phi);

double coherence_fidelity_iswap(const CoherenceTimes& ct, double tau_ns);
double coherence_fidelity_cz(const CoherenceTimes& ct, double tau_ns);

// Readout. Confusion matrices are column stochastic: c(measured, prepared).
using Confusion = Eigen::Matrix2d;
Confusion symmetric_confusion(double fidelity);

Eigen::Vector4d readout_application(const Eigen::Vector4d& p, const Confusion& q1, const Confusion& q2);

struct Compensated {
  Eigen::Vector4d p = Eigen::Vector4d::Zero();
  double clipped = 0.0;  // total negative mass removed before renormalizing
};

Compensated readout_compensation(const Eigen::Vector4d& counts, const Confusion& q1, const Confusion& q2);

struct QptOptions {
  long shots = 0;  // 0: exact probabilities
  Confusion q1 = Confusion::Identity();
  Confusion q2 = Confusion::Identity();
  bool compensate = true;
  std::uint64_t seed = 0;
};

struct QptResult {
  ProcessTensor ptm;
  double max_clipped = 0.0;
};

/// Product inputs {0, 1, +, +i}^2, nine Pauli measurement settings, optional
/// readout error and multinomial sampling, then linear inversion.
QptResult simulate_qpt(const Mat4c& v, const QptOptions& options = {});

}  // namespace tcsim
