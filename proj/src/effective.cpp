#include "tcsim/effective.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

using Mat3 = Eigen::Matrix3d;

Mat3 level_diag(double f, double eta) {
  Mat3 d = Mat3::Zero();
  d(1, 1) = f;
  d(2, 2) = 2.0 * f - eta;
  return d;
}

Mat3 lowering() {
  Mat3 a = Mat3::Zero();
  a(0, 1) = 1.0;
  a(1, 2) = std::sqrt(2.0);
  return a;
}

RealMat27 kron3(const Mat3& a, const Mat3& b, const Mat3& c) {
  RealMat27 out;
  for (int i1 = 0; i1 < 3; ++i1)
    for (int j1 = 0; j1 < 3; ++j1)
      for (int i2 = 0; i2 < 3; ++i2)
        for (int j2 = 0; j2 < 3; ++j2)
          for (int i3 = 0; i3 < 3; ++i3)
            for (int j3 = 0; j3 < 3; ++j3)
              out(basis_index(i1, i2, i3), basis_index(j1, j2, j3)) = a(i1, j1) * b(i2, j2) * c(i3, j3);
  return out;
}

struct Operators {
  RealMat27 xx1c, xx2c, xx12;
  RealMat27 ex1c, ex2c, ex12;  // excitation-conserving parts
};

const Operators& operators() {
  static const Operators ops = [] {
    const Mat3 a = lowering();
    const Mat3 x = a + a.transpose();
    const Mat3 i = Mat3::Identity();
    Operators o;
    o.xx1c = kron3(x, x, i);
    o.xx2c = kron3(i, x, x);
    o.xx12 = kron3(x, i, x);
    o.ex1c = kron3(a.transpose(), a, i) + kron3(a, a.transpose(), i);
    o.ex2c = kron3(i, a.transpose(), a) + kron3(i, a, a.transpose());
    o.ex12 = kron3(a.transpose(), i, a) + kron3(a, i, a.transpose());
    return o;
  }();
  return ops;
}

void check_denominator(double d) {
  if (std::abs(d) < 1e-6) fail(ErrorCode::Numeric, "coupler resonance; dispersive elimination invalid");
}

// Greedy maximum-overlap assignment of eigenvectors to bare states.
std::array<int, kDim> assign_dressed(const RealMat27& vecs) {
  std::array<int, kDim> map{};
  map.fill(-1);
  std::array<bool, kDim> used{};
  std::vector<std::tuple<double, int, int>> cand;
  cand.reserve(kDim * kDim);
  for (int b = 0; b < kDim; ++b)
    for (int e = 0; e < kDim; ++e) cand.emplace_back(vecs(b, e) * vecs(b, e), b, e);
  std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
    return std::get<2>(x) < std::get<2>(y);
  });
  for (const auto& [w, b, e] : cand) {
    if (map[static_cast<std::size_t>(b)] >= 0 || used[static_cast<std::size_t>(e)]) continue;
    map[static_cast<std::size_t>(b)] = e;
    used[static_cast<std::size_t>(e)] = true;
  }
  return map;
}

std::pair<int, int> exchange_states(Exchange which) {
  switch (which) {
    case Exchange::E01:
      return {basis_index(1, 0, 0), basis_index(0, 0, 1)};
    case Exchange::E20:
      return {basis_index(1, 0, 1), basis_index(2, 0, 0)};
    case Exchange::E02:
      return {basis_index(1, 0, 1), basis_index(0, 0, 2)};
  }
  return {0, 0};
}

double bare_resonance(const DeviceParams& p, Exchange which) {
  switch (which) {
    case Exchange::E01:
      return p.f1;
    case Exchange::E20:
      return p.f1 - p.eta1;
    case Exchange::E02:
      return p.f1 + p.eta2;
  }
  return p.f1;
}

// Splitting of the two eigenstates carrying most weight on the bare pair.
double pair_gap(const DeviceParams& p, Exchange which) {
  const auto [a, b] = exchange_states(which);
  Eigen::SelfAdjointEigenSolver<RealMat27> es(build_hamiltonian(p).h);
  const auto& v = es.eigenvectors();
  int best = -1;
  int second = -1;
  double wb = -1.0;
  double ws = -1.0;
  for (int k = 0; k < kDim; ++k) {
    const double w = v(a, k) * v(a, k) + v(b, k) * v(b, k);
    if (w > wb) {
      second = best;
      ws = wb;
      best = k;
      wb = w;
    } else if (w > ws) {
      second = k;
      ws = w;
    }
  }
  return std::abs(es.eigenvalues()[best] - es.eigenvalues()[second]);
}

std::pair<double, double> minimize_gap(const DeviceParams& p, Exchange which, double window) {
  if (!(window > 0.0)) fail(ErrorCode::InvalidArgument, "sweep window must be positive");
  const double center = bare_resonance(p, which);
  const double lo = center - window;
  const double hi = center + window;
  auto gap = [&](double f2) {
    DeviceParams q = p;
    q.f2 = f2;
    return pair_gap(q, which);
  };
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(gap, lo, hi, 50, iters);
  const double edge = 1e-6 * window;
  if (r.first - lo < edge || hi - r.first < edge) {
    fail(ErrorCode::Numeric, "no avoided crossing found in sweep window");
  }
  // Brent stalls where the gap is flat to rounding. Near the crossing gap^2 is
  // a parabola in f2, so a three-point vertex step sharpens the minimum.
  double x = r.first;
  double best = r.second;
  for (double h : {1e-4 * window, 1e-6 * window}) {
    const double gm = gap(x - h), g0 = gap(x), gp = gap(x + h);
    const double ym = gm * gm, y0 = g0 * g0, yp = gp * gp;
    const double curv = ym - 2.0 * y0 + yp;
    if (!(curv > 0.0)) break;
    const double xv = x + 0.5 * h * (ym - yp) / curv;
    const double gv = gap(xv);
    if (gv <= best) {
      x = xv;
      best = gv;
    }
  }
  return {x, best};
}

// Periodic sample of f01 along the flat-top modulation (no envelope).
std::vector<double> sample_frequency(const TransmonSpec& q2, const FluxPulse& pulse, int m) {
  std::vector<double> f(static_cast<std::size_t>(m));
  const double period = 1.0 / pulse.mod_freq;
  for (int j = 0; j < m; ++j) {
    const double t = period * j / m;
    const double flux =
        pulse.phi_dc + pulse.amplitude * std::sin(2.0 * std::numbers::pi * pulse.mod_freq * t + pulse.phase);
    f[static_cast<std::size_t>(j)] = level_energies(q2, flux_to_phase(flux)).f01;
  }
  return f;
}

struct Spectral {
  MeanExcursion me;
  std::vector<std::complex<double>> eps;
};

Spectral spectral_weights(const TransmonSpec& q2, const FluxPulse& pulse, int n_max, int spacing, int m) {
  Eigen::FFT<double> fft;
  const std::vector<double> f = sample_frequency(q2, pulse, m);
  std::vector<std::complex<double>> c;
  fft.fwd(c, f);
  for (auto& x : c) x /= static_cast<double>(m);

  Spectral s;
  s.me.mean = c[0].real();
  s.me.excursion = 2.0 * std::abs(c[static_cast<std::size_t>(spacing)]);

  // theta(t_j) = 2 pi sum_{k != 0} c_k (e^{i k w t} - 1) / (i 2 pi k f_p)
  std::vector<std::complex<double>> theta_hat(static_cast<std::size_t>(m), 0.0);
  std::complex<double> offset = 0.0;
  const std::complex<double> i(0.0, 1.0);
  for (int k = 1; k < m; ++k) {
    const int kk = k <= m / 2 ? k : k - m;
    if (2 * k == m) continue;  // Nyquist term has no unique sign
    const std::complex<double> coef = c[static_cast<std::size_t>(k)] / (i * static_cast<double>(kk) * pulse.mod_freq);
    theta_hat[static_cast<std::size_t>(k)] = coef;
    offset -= coef;
  }
  std::vector<std::complex<double>> theta;
  fft.inv(theta, theta_hat);
  std::vector<std::complex<double>> g(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    // Eigen's inverse FFT divides by m.
    const double th = (theta[static_cast<std::size_t>(j)] * static_cast<double>(m) + offset).real();
    g[static_cast<std::size_t>(j)] = std::exp(-i * th);
  }
  std::vector<std::complex<double>> gh;
  fft.fwd(gh, g);
  s.eps.resize(static_cast<std::size_t>(2 * n_max + 1));
  for (int n = -n_max; n <= n_max; ++n) {
    // (1/M) sum_j g_j e^{+i 2 pi n s j / M} is the forward-FFT bin -n s.
    int bin = (-n * spacing) % m;
    if (bin < 0) bin += m;
    s.eps[static_cast<std::size_t>(n + n_max)] = gh[static_cast<std::size_t>(bin)] / static_cast<double>(m);
  }
  return s;
}

}  // namespace

ThreeBodyHamiltonian build_hamiltonian(const DeviceParams& p, bool rwa) {
  const Mat3 i = Mat3::Identity();
  const Operators& o = operators();
  ThreeBodyHamiltonian out;
  out.h = kron3(level_diag(p.f1, p.eta1), i, i) + kron3(i, level_diag(p.fc, p.etac), i) +
          kron3(i, i, level_diag(p.f2, p.eta2));
  if (rwa) {
    out.h += p.g1c * o.ex1c + p.g2c * o.ex2c + p.g12 * o.ex12;
  } else {
    out.h += p.g1c * o.xx1c + p.g2c * o.xx2c + p.g12 * o.xx12;
  }
  return out;
}

StaticEffective static_couplings(const DeviceParams& p, SwVariant variant) {
  StaticEffective s;
  s.delta1 = p.fc - p.f1;
  s.delta2 = p.fc - p.f2;
  s.sigma1 = p.fc + p.f1;
  s.sigma2 = p.fc + p.f2;
  for (double d : {s.delta1, s.delta2, s.sigma1, s.sigma2, s.delta1 + p.eta1, s.delta2 + p.eta2,
                   s.sigma1 - p.eta1, s.sigma2 - p.eta2}) {
    check_denominator(d);
  }
  const double cr = variant == SwVariant::Full ? 1.0 : 0.0;
  auto inv = [](double x) { return 1.0 / x; };
  const double gg = p.g1c * p.g2c;
  const double r2 = std::sqrt(2.0);
  s.g01 = p.g12 - 0.5 * gg * (inv(s.delta1) + inv(s.delta2) + cr * (inv(s.sigma1) + inv(s.sigma2)));
  s.g02 = r2 * p.g12 - gg / r2 *
                           (inv(s.delta1) + inv(s.delta2 + p.eta2) +
                            cr * (inv(s.sigma1) + inv(s.sigma2 - p.eta2)));
  s.g20 = r2 * p.g12 - gg / r2 *
                           (inv(s.delta1 + p.eta1) + inv(s.delta2) +
                            cr * (inv(s.sigma1 - p.eta1) + inv(s.sigma2)));
  // A level below the coupler is pushed down by its virtual exchange.
  const double g1 = p.g1c * p.g1c;
  const double g2 = p.g2c * p.g2c;
  s.f01_1 = p.f1 - g1 / s.delta1 - cr * g1 / s.sigma1;
  s.f01_2 = p.f2 - g2 / s.delta2 - cr * g2 / s.sigma2;
  s.f02_1 = 2.0 * p.f1 - p.eta1 - 2.0 * g1 / (s.delta1 + p.eta1) - cr * 2.0 * g1 / (s.sigma1 - p.eta1);
  s.f02_2 = 2.0 * p.f2 - p.eta2 - 2.0 * g2 / (s.delta2 + p.eta2) - cr * 2.0 * g2 / (s.sigma2 - p.eta2);
  if (p.dispersive_ratio1() > 0.3) s.warnings.push_back("g1c/|delta1| > 0.3: outside the dispersive regime");
  if (p.dispersive_ratio2() > 0.3) s.warnings.push_back("g2c/|delta2| > 0.3: outside the dispersive regime");
  return s;
}

double exact_coupling(const DeviceParams& p, Exchange which, double window) {
  return 0.5 * minimize_gap(p, which, window).second;
}

double exact_resonance_f2(const DeviceParams& p, Exchange which, double window) {
  return minimize_gap(p, which, window).first;
}

int sideband_spacing(const FluxPulse& pulse) {
  const double r = pulse.phi_dc * 2.0;
  return std::abs(r - std::round(r)) < 1e-12 ? 2 : 1;
}

MeanExcursion average_and_excursion(const TransmonSpec& q2, const FluxPulse& pulse) {
  if (pulse.amplitude == 0.0 || pulse.mod_freq == 0.0) {
    return {level_energies(q2, flux_to_phase(pulse.phi_dc)).f01, 0.0};
  }
  return numeric_fourier_weights(q2, pulse, 0).frequency;
}

FourierWeights numeric_fourier_weights(const TransmonSpec& q2, const FluxPulse& pulse, int n_max) {
  if (n_max < 0) fail(ErrorCode::InvalidArgument, "sideband cutoff must be >= 0");
  FourierWeights w;
  w.n_max = n_max;
  w.spacing = sideband_spacing(pulse);
  if (pulse.amplitude == 0.0) {
    w.eps.assign(static_cast<std::size_t>(2 * n_max + 1), 0.0);
    w.eps[static_cast<std::size_t>(n_max)] = 1.0;
    w.frequency = {level_energies(q2, flux_to_phase(pulse.phi_dc)).f01, 0.0};
    return w;
  }
  if (!(pulse.mod_freq > 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be positive");

  constexpr double kTol = 1e-12;
  int m = 64;
  while (m < 4 * w.spacing * (n_max + 1)) m *= 2;
  Spectral prev = spectral_weights(q2, pulse, n_max, w.spacing, m);
  double change = 0.0;
  for (m *= 2; m <= (1 << 16); m *= 2) {
    Spectral cur = spectral_weights(q2, pulse, n_max, w.spacing, m);
    change = std::abs(cur.me.mean - prev.me.mean) + std::abs(cur.me.excursion - prev.me.excursion);
    for (std::size_t k = 0; k < cur.eps.size(); ++k) change = std::max(change, std::abs(cur.eps[k] - prev.eps[k]));
    prev = std::move(cur);
    if (change < kTol) {
      w.eps = std::move(prev.eps);
      w.frequency = prev.me;
      w.samples = m;
      w.tolerance = change;
      return w;
    }
  }
  fail(ErrorCode::Numeric, "Fourier weights did not converge: change " + std::to_string(change) +
                               " above tolerance 1e-12");
}

double amplitude_for_mean_frequency(const TransmonSpec& q2, const FluxPulse& shape, double target,
                                    double a_max) {
  FluxPulse pulse = shape;
  auto residual = [&](double a) {
    pulse.amplitude = a;
    return average_and_excursion(q2, pulse).mean - target;
  };
  const double r0 = residual(0.0);
  if (std::abs(r0) < 1e-9) return 0.0;
  const double r1 = residual(a_max);
  if (r0 * r1 > 0.0) {
    fail(ErrorCode::Unreachable, "resonance unreachable: target " + std::to_string(target) +
                                     " GHz outside the modulated band [" + std::to_string(r1 + target) + ", " +
                                     std::to_string(r0 + target) + "] GHz");
  }
  boost::uintmax_t iters = 200;
  auto tol = [&](double a, double b) { return std::abs(residual(0.5 * (a + b))) < 1e-9 || b - a < 1e-15; };
  const auto root = boost::math::tools::toms748_solve(residual, 0.0, a_max, r0, r1, tol, iters);
  const double a = 0.5 * (root.first + root.second);
  if (std::abs(residual(a)) > 1e-6) fail(ErrorCode::Numeric, "resonance amplitude did not converge");
  return a;
}

std::vector<double> bessel_weights(double excursion, double mod_freq, int n_max) {
  if (!(mod_freq > 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be positive");
  const double x = excursion / (2.0 * mod_freq);
  std::vector<double> out;
  for (int n = -n_max; n <= n_max; ++n) {
    const double j = std::cyl_bessel_j(static_cast<double>(std::abs(n)), std::abs(x));
    double s = (n < 0 && (n % 2 != 0)) ? -1.0 : 1.0;
    if (x < 0.0 && (std::abs(n) % 2 == 1)) s = -s;
    out.push_back(s * j);
  }
  return out;
}

ModulatedCouplings modulated_couplings(const DeviceParams& p, const FluxPulse& pulse,
                                       const TransmonSpec& q2, int n_max, SwVariant variant) {
  if (!(pulse.mod_freq > 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be positive");
  const FourierWeights w = numeric_fourier_weights(q2, pulse, n_max);
  ModulatedCouplings m;
  m.n_max = n_max;
  m.spacing = w.spacing;
  m.f2_mean = w.frequency.mean;
  m.f2_excursion = w.frequency.excursion;
  m.eps = w.eps;
  m.eps_bessel = bessel_weights(w.frequency.excursion, pulse.mod_freq, n_max);

  const double cr = variant == SwVariant::Full ? 1.0 : 0.0;
  const double d1 = p.fc - p.f1;
  const double s1 = p.fc + p.f1;
  const double d2 = p.fc - m.f2_mean;
  const double s2 = p.fc + m.f2_mean;
  const double r2 = std::sqrt(2.0);
  for (double d : {d1, s1, d1 + p.eta1, s1 - p.eta1}) check_denominator(d);
  for (int n = -n_max; n <= n_max; ++n) {
    const double shift = n * m.spacing * pulse.mod_freq;
    for (double d : {d2 - shift, s2 + shift, d2 + p.eta2 - shift, s2 - p.eta2 + shift}) {
      if (std::abs(d) < 1e-6) {
        fail(ErrorCode::Numeric, "sideband n=" + std::to_string(n) + " is resonant with the coupler");
      }
    }
    const std::complex<double> e = m.eps[m.idx(n)];
    const double gg = p.g1c * p.g2c;
    m.g01.push_back(e * p.g12 -
                    e * gg * 0.5 * (1.0 / d1 + 1.0 / (d2 - shift) + cr * (1.0 / s1 + 1.0 / (s2 + shift))));
    m.g02.push_back(r2 * e * p.g12 -
                    e * gg * (r2 / 2.0) *
                        (1.0 / d1 + 1.0 / (d2 + p.eta2 - shift) + cr * (1.0 / s1 + 1.0 / (s2 - p.eta2 + shift))));
    m.g20.push_back(r2 * e * p.g12 -
                    e * gg * (r2 / 2.0) *
                        (1.0 / (d1 + p.eta1) + 1.0 / (d2 - shift) + cr * (1.0 / (s1 - p.eta1) + 1.0 / (s2 + shift))));
  }
  return m;
}

Eigen::Matrix<std::complex<double>, kDim, 4> computational_basis(const DeviceParams& idle, bool dressed) {
  const int bare[4] = {basis_index(0, 0, 0), basis_index(0, 0, 1), basis_index(1, 0, 0), basis_index(1, 0, 1)};
  Eigen::Matrix<std::complex<double>, kDim, 4> b = Eigen::Matrix<std::complex<double>, kDim, 4>::Zero();
  if (!dressed) {
    for (int k = 0; k < 4; ++k) b(bare[k], k) = 1.0;
    return b;
  }
  for (int k = 0; k < 4; ++k) b.col(k) = dressed_state(idle, bare[k]);
  return b;
}

CVec27 dressed_state(const DeviceParams& idle, int bare_index) {
  Eigen::SelfAdjointEigenSolver<RealMat27> es(build_hamiltonian(idle).h);
  const auto map = assign_dressed(es.eigenvectors());
  Eigen::Matrix<double, kDim, 1> v = es.eigenvectors().col(map[static_cast<std::size_t>(bare_index)]);
  if (v[bare_index] < 0.0) v = -v;
  return v.cast<std::complex<double>>();
}

}  // namespace tcsim
