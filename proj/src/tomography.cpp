#include "tcsim/tomography.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

using cd = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat16c = Eigen::Matrix<cd, 16, 16>;
using Vec16c = Eigen::Matrix<cd, 16, 1>;
constexpr cd kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

Mat2c single_pauli(int a) {
  Mat2c m;
  switch (a) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Mat4c kron(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

const std::array<Mat4c, 16>& paulis() {
  static const std::array<Mat4c, 16> table = [] {
    std::array<Mat4c, 16> t;
    for (int k = 0; k < 16; ++k) t[static_cast<std::size_t>(k)] = kron(single_pauli(k / 4), single_pauli(k % 4));
    return t;
  }();
  return table;
}

double wrap(double a) {
  // into (-pi, pi]
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// Choi matrix in the column-major vec basis: C(a + 4b, c + 4d) = <a|E(|b><d|)|c>.
Mat16c choi(const Ptm& r) {
  const auto& p = paulis();
  Mat16c c = Mat16c::Zero();
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const double w = r(i, j) / 4.0;
      if (w == 0.0) continue;
      const Mat4c& pi = p[static_cast<std::size_t>(i)];
      const Mat4c& pj = p[static_cast<std::size_t>(j)];
      for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
          const cd s = w * pj(d, b);
          if (s == 0.0) continue;
          for (int a = 0; a < 4; ++a)
            for (int cc = 0; cc < 4; ++cc) c(a + 4 * b, cc + 4 * d) += s * pi(a, cc);
        }
    }
  }
  return c;
}

double fsim_process_fidelity(const Mat16c& c, double theta, double phi) {
  const Mat4c v = fsim(theta, phi);
  const Vec16c x = Eigen::Map<const Vec16c>(v.data());
  return (x.adjoint() * c * x)(0, 0).real() / 16.0;
}

}  // namespace

Mat4c two_qubit_pauli(int k) {
  if (k < 0 || k > 15) fail(ErrorCode::InvalidArgument, "Pauli index out of range");
  return paulis()[static_cast<std::size_t>(k)];
}

std::string pauli_label(int k) {
  static const char* names = "IXYZ";
  if (k < 0 || k > 15) fail(ErrorCode::InvalidArgument, "Pauli index out of range");
  return std::string{names[k / 4], names[k % 4]};
}

Mat4c fsim(double theta, double phi) {
  Mat4c u = Mat4c::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = std::cos(theta);
  u(2, 2) = std::cos(theta);
  u(1, 2) = -kI * std::sin(theta);
  u(2, 1) = -kI * std::sin(theta);
  u(3, 3) = std::exp(-kI * phi);
  return u;
}

Mat4c iswap_ideal() { return fsim(-kPi / 2.0, 0.0); }
Mat4c cz_ideal() { return fsim(0.0, kPi); }

bool ProcessTensor::trace_preserving(double tol) const {
  if (std::abs(r(0, 0) - 1.0) > tol) return false;
  for (int j = 1; j < 16; ++j)
    if (std::abs(r(0, j)) > tol) return false;
  return true;
}

Basis27x4 bare_basis() {
  Basis27x4 b = Basis27x4::Zero();
  b(basis_index(0, 0, 0), 0) = 1.0;
  b(basis_index(0, 0, 1), 1) = 1.0;
  b(basis_index(1, 0, 0), 2) = 1.0;
  b(basis_index(1, 0, 1), 3) = 1.0;
  return b;
}

Mat4c project(const CMat27& u, const Basis27x4& basis) { return basis.adjoint() * u * basis; }

ProcessTensor ptm_from_operator(const Mat4c& v) {
  const auto& p = paulis();
  ProcessTensor out;
  for (int j = 0; j < 16; ++j) {
    const Mat4c img = v * p[static_cast<std::size_t>(j)] * v.adjoint();
    for (int i = 0; i < 16; ++i) {
      out.r(i, j) = (p[static_cast<std::size_t>(i)] * img).trace().real() / 4.0;
    }
  }
  out.leakage = std::max(0.0, 1.0 - (v.adjoint() * v).trace().real() / 4.0);
  return out;
}

ProcessTensor qubit_subspace_ptm(const CMat27& u) { return ptm_from_operator(project(u, bare_basis())); }

ProcessTensor qubit_subspace_ptm(const CMat27& u, const Basis27x4& basis) {
  return ptm_from_operator(project(u, basis));
}

Mat4c virtual_z(double z1, double z2) {
  Mat4c d = Mat4c::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = std::exp(kI * z2);
  d(2, 2) = std::exp(kI * z1);
  d(3, 3) = std::exp(kI * (z1 + z2));
  return d;
}

Mat4c virtual_z_correct(const Mat4c& v, double z1, double z2) { return virtual_z(z1, z2) * v; }

ProcessTensor virtual_z_correct(const ProcessTensor& p, double z1, double z2) {
  ProcessTensor out = p;
  out.r = ptm_from_operator(virtual_z(z1, z2)).r * p.r;
  return out;
}

VirtualZ extract_virtual_z(const Mat4c& v, const Mat4c& target) {
  const Mat4c m = v * target.adjoint();
  const Eigen::Vector4cd d = m.diagonal();
  for (int k = 0; k < 4; ++k) {
    if (std::abs(d[k]) < 1e-3) {
      fail(ErrorCode::Numeric, "virtual-Z extraction ill-conditioned: vanishing overlap with target");
    }
  }
  VirtualZ z;
  z.z1 = std::arg(d[0]) - std::arg(d[2]);
  z.z2 = std::arg(d[0]) - std::arg(d[1]);
  // Coordinate ascent; each update is the exact maximizer in one angle.
  for (int it = 0; it < 200; ++it) {
    const double old1 = z.z1;
    const double old2 = z.z2;
    const cd a1 = d[0] + std::exp(kI * z.z2) * d[1];
    const cd b1 = d[2] + std::exp(kI * z.z2) * d[3];
    z.z1 = std::arg(a1) - std::arg(b1);
    const cd a2 = d[0] + std::exp(kI * z.z1) * d[2];
    const cd b2 = d[1] + std::exp(kI * z.z1) * d[3];
    z.z2 = std::arg(a2) - std::arg(b2);
    if (std::abs(wrap(z.z1 - old1)) < 1e-15 && std::abs(wrap(z.z2 - old2)) < 1e-15) break;
  }
  z.z1 = wrap(z.z1);
  z.z2 = wrap(z.z2);
  return z;
}

double process_fidelity(const ProcessTensor& ptm, const ProcessTensor& ideal) {
  return (ideal.r.transpose() * ptm.r).trace() / 16.0;
}

double average_fidelity(const ProcessTensor& ptm, const ProcessTensor& ideal) {
  return (4.0 * process_fidelity(ptm, ideal) + 1.0) / 5.0;
}

double unitarity(const ProcessTensor& ptm) { return (ptm.r.transpose() * ptm.r).trace() / 16.0; }

FSimFit fit_fsim(const ProcessTensor& ptm) {
  const Mat16c c = choi(ptm.r);
  FSimFit fit;
  if (unitarity(ptm) < 0.9) fit.warning = "process far from unitary; fSim fit is indicative only";
  constexpr int kGrid = 121;
  const double step = 2.0 * kPi / kGrid;
  double best = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double th = -kPi + step * (i + 1);
    for (int j = 0; j < kGrid; ++j) {
      const double ph = -kPi + step * (j + 1);
      const double f = fsim_process_fidelity(c, th, ph);
      if (f > best) {
        best = f;
        fit.theta = th;
        fit.phi = ph;
      }
    }
  }
  // Compass search from the best grid cell.
  double h = step;
  while (h > 1e-11) {
    bool moved = false;
    const double cand[4][2] = {{h, 0}, {-h, 0}, {0, h}, {0, -h}};
    for (const auto& dlt : cand) {
      const double f = fsim_process_fidelity(c, fit.theta + dlt[0], fit.phi + dlt[1]);
      if (f > best) {
        best = f;
        fit.theta += dlt[0];
        fit.phi += dlt[1];
        moved = true;
      }
    }
    if (!moved) h *= 0.5;
  }
  fit.theta = wrap(fit.theta);
  fit.phi = wrap(fit.phi);
  fit.fidelity_to_fit = (4.0 * best + 1.0) / 5.0;
  return fit;
}

double phase_error(double delta_phi) { return 3.0 * (1.0 - std::cos(delta_phi)) / 10.0; }

double coherence_fidelity_iswap(const CoherenceTimes& ct, double tau_ns) {
  ct.validate();
  if (!(tau_ns > 0.0)) fail(ErrorCode::InvalidArgument, "gate time must be positive");
  const double tau = tau_ns * 1e-3;  // us
  return 1.0 - (1.0 / ct.t1_q1 + 1.0 / ct.t1_q2) * tau / 5.0 - 2.0 * (1.0 / ct.t2s_q1 + 1.0 / ct.t2s_q2) * tau / 5.0;
}

double coherence_fidelity_cz(const CoherenceTimes& ct, double tau_ns) {
  ct.validate();
  if (!(tau_ns > 0.0)) fail(ErrorCode::InvalidArgument, "gate time must be positive");
  const double tau = tau_ns * 1e-3;
  return 1.0 - 19.0 * (1.0 / ct.t1_q1 + 1.0 / ct.t1_q2) * tau / 60.0 -
         (29.0 / (60.0 * ct.t2s_q1) + 61.0 / (80.0 * ct.t2s_q2)) * tau;
}

Confusion symmetric_confusion(double fidelity) {
  if (!(fidelity > 0.0 && fidelity <= 1.0)) fail(ErrorCode::InvalidArgument, "readout fidelity must lie in (0, 1]");
  Confusion c;
  c << fidelity, 1.0 - fidelity, 1.0 - fidelity, fidelity;
  return c;
}

namespace {
Eigen::Matrix4d kron_real(const Confusion& a, const Confusion& b) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}
}  // namespace

Eigen::Vector4d readout_application(const Eigen::Vector4d& p, const Confusion& q1, const Confusion& q2) {
  return kron_real(q1, q2) * p;
}

Compensated readout_compensation(const Eigen::Vector4d& counts, const Confusion& q1, const Confusion& q2) {
  if (std::abs(q1.determinant()) < 1e-12 || std::abs(q2.determinant()) < 1e-12) {
    fail(ErrorCode::Numeric, "singular confusion matrix");
  }
  const double total = counts.sum();
  if (!(total > 0.0) || (counts.array() < 0.0).any()) fail(ErrorCode::InvalidArgument, "counts must be nonnegative with a positive total");
  const Eigen::Matrix2d i1 = q1.inverse();
  const Eigen::Matrix2d i2 = q2.inverse();
  Compensated out;
  out.p = kron_real(i1, i2) * (counts / total);
  for (int k = 0; k < 4; ++k) {
    if (out.p[k] < 0.0) {
      out.clipped += -out.p[k];
      out.p[k] = 0.0;
    }
  }
  out.p /= out.p.sum();
  return out;
}

QptResult simulate_qpt(const Mat4c& v, const QptOptions& opt) {
  if (opt.shots < 0) fail(ErrorCode::InvalidArgument, "shot count must be nonnegative");
  // Single-qubit preparations |0>, |1>, |+>, |+i>.
  std::array<Eigen::Vector2cd, 4> prep;
  const double s = 1.0 / std::sqrt(2.0);
  prep[0] << 1.0, 0.0;
  prep[1] << 0.0, 1.0;
  prep[2] << s, s;
  prep[3] << s, kI * s;
  // Rotations taking the X, Y, Z eigenbases to the computational basis.
  std::array<Mat2c, 3> rot;
  rot[0] << s, s, s, -s;                 // H
  rot[1] << s, -kI * s, s, kI * s;       // H S^dag
  rot[2] = Mat2c::Identity();

  const auto& p = paulis();
  const Eigen::Matrix4d conf = kron_real(opt.q1, opt.q2);
  std::mt19937_64 rng(opt.seed);
  Ptm s_mat = Ptm::Zero();
  Ptm o_mat = Ptm::Zero();
  QptResult res;

  for (int in = 0; in < 16; ++in) {
    Eigen::Vector4cd psi;
    const auto& a = prep[static_cast<std::size_t>(in / 4)];
    const auto& b = prep[static_cast<std::size_t>(in % 4)];
    for (int i = 0; i < 4; ++i) psi[i] = a[i / 2] * b[i % 2];
    const Mat4c rho = psi * psi.adjoint();
    for (int k = 0; k < 16; ++k) s_mat(k, in) = (p[static_cast<std::size_t>(k)] * rho).trace().real();

    const Mat4c out = v * rho * v.adjoint();
    Eigen::Matrix<double, 16, 1> sum = Eigen::Matrix<double, 16, 1>::Zero();
    Eigen::Matrix<double, 16, 1> hits = Eigen::Matrix<double, 16, 1>::Zero();
    for (int setting = 0; setting < 9; ++setting) {
      const int m1 = setting / 3;
      const int m2 = setting % 3;
      const Mat4c r = kron(rot[static_cast<std::size_t>(m1)], rot[static_cast<std::size_t>(m2)]);
      const Mat4c rr = r * out * r.adjoint();
      Eigen::Vector4d prob;
      for (int k = 0; k < 4; ++k) prob[k] = std::max(0.0, rr(k, k).real());
      if (!(prob.sum() > 0.0)) fail(ErrorCode::Numeric, "projected map annihilates an input state");
      prob /= prob.sum();
      prob = conf * prob;
      if (opt.shots > 0) {
        std::discrete_distribution<int> dist(prob.data(), prob.data() + 4);
        Eigen::Vector4d counts = Eigen::Vector4d::Zero();
        for (long n = 0; n < opt.shots; ++n) counts[dist(rng)] += 1.0;
        prob = counts;
      }
      if (opt.compensate) {
        const Compensated c = readout_compensation(prob, opt.q1, opt.q2);
        res.max_clipped = std::max(res.max_clipped, c.clipped);
        prob = c.p;
      } else {
        prob /= prob.sum();
      }
      // Pauli indices 1..3 correspond to settings 0..2.
      for (int a1 = 0; a1 < 4; ++a1) {
        if (a1 != 0 && a1 != m1 + 1) continue;
        for (int a2 = 0; a2 < 4; ++a2) {
          if (a2 != 0 && a2 != m2 + 1) continue;
          double e = 0.0;
          for (int k = 0; k < 4; ++k) {
            const double s1 = (a1 != 0 && (k / 2) == 1) ? -1.0 : 1.0;
            const double s2 = (a2 != 0 && (k % 2) == 1) ? -1.0 : 1.0;
            e += s1 * s2 * prob[k];
          }
          sum[4 * a1 + a2] += e;
          hits[4 * a1 + a2] += 1.0;
        }
      }
    }
    for (int k = 0; k < 16; ++k) o_mat(k, in) = sum[k] / hits[k];
  }
  res.ptm.r = o_mat * s_mat.inverse();
  res.ptm.leakage = std::max(0.0, 1.0 - (v.adjoint() * v).trace().real() / 4.0);
  return res;
}

}  // namespace tcsim
