#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "tcsim/device.hpp"
#include "tcsim/fluxcontrol.hpp"
#include "tcsim/spectrum.hpp"

namespace tcsim {

inline constexpr int kLevels = 3;
inline constexpr int kDim = 27;

using RealMat27 = Eigen::Matrix<double, kDim, kDim>;
using CMat27 = Eigen::Matrix<std::complex<double>, kDim, kDim>;
using CVec27 = Eigen::Matrix<std::complex<double>, kDim, 1>;

/// Basis |n1 nc n2>, index 9 n1 + 3 nc + n2.
constexpr int basis_index(int n1, int nc, int n2) { return 9 * n1 + 3 * nc + n2; }

/// The Hamiltonian is real symmetric in the |n1 nc n2> basis, so it is stored
/// as a real matrix.
struct ThreeBodyHamiltonian {
  RealMat27 h;
  static constexpr const char* ordering = "|n1 nc n2>, index = 9*n1 + 3*nc + n2";
};

/// Lab-frame truncated Hamiltonian (GHz). With `rwa` the sigma_x sigma_x
/// couplings keep only excitation-conserving terms.
ThreeBodyHamiltonian build_hamiltonian(const DeviceParams& p, bool rwa = false);

/// Full keeps the counter-rotating 1/Sigma terms; MainText drops them.
enum class SwVariant { Full, MainText };

struct StaticEffective {
  double f01_1 = 0.0;
  double f01_2 = 0.0;
  double f02_1 = 0.0;
  double f02_2 = 0.0;
  double g01 = 0.0;
  double g02 = 0.0;
  double g20 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::vector<std::string> warnings;
};

StaticEffective static_couplings(const DeviceParams& p, SwVariant variant = SwVariant::Full);

/// Pairs of bare states whose avoided crossing defines an exchange coupling.
enum class Exchange {
  E01,  // |100> <-> |001>
  E20,  // |101> <-> |200>
  E02,  // |101> <-> |002>
};

/// Half of the minimum splitting of the two dressed states as f2 sweeps
/// through the bare resonance (window +- `window` GHz). Positive.
double exact_coupling(const DeviceParams& p, Exchange which, double window = 0.05);
inline double exact_g01(const DeviceParams& p) { return exact_coupling(p, Exchange::E01); }

/// f2 at which the exact splitting is minimal.
double exact_resonance_f2(const DeviceParams& p, Exchange which, double window = 0.05);

/// Sideband spacing in units of the modulation frequency: 2 when the DC
/// point is a sweet spot of the SQUID (frequency oscillates at 2 f_p).
int sideband_spacing(const FluxPulse& pulse);

struct MeanExcursion {
  double mean = 0.0;       // GHz, time average of f01 over one period
  double excursion = 0.0;  // GHz, amplitude of the dominant harmonic
};

MeanExcursion average_and_excursion(const TransmonSpec& q2, const FluxPulse& pulse);

struct FourierWeights {
  int n_max = 0;
  int spacing = 1;
  std::vector<std::complex<double>> eps;  // index n + n_max
  MeanExcursion frequency;
  int samples = 0;
  double tolerance = 0.0;  // last change under sample doubling

  std::complex<double> at(int n) const { return eps[static_cast<std::size_t>(n + n_max)]; }
};

/// eps_n = (1/T) int exp(-i theta(t)) exp(i n s w_p t) dt over one period of
/// the flat-top modulation, theta(t) = 2 pi int_0^t (f2 - mean f2).
FourierWeights numeric_fourier_weights(const TransmonSpec& q2, const FluxPulse& pulse, int n_max);

/// Modulation amplitude in [0, a_max] (Phi0) whose time-averaged f01 equals
/// `target` within 1 kHz. Throws "resonance unreachable" outside the band.
double amplitude_for_mean_frequency(const TransmonSpec& q2, const FluxPulse& shape, double target,
                                    double a_max = 0.5);

/// J_n(excursion / (2 f_p)) for n in [-n_max, n_max].
std::vector<double> bessel_weights(double excursion, double mod_freq, int n_max);

struct ModulatedCouplings {
  int n_max = 0;
  int spacing = 1;
  double f2_mean = 0.0;
  double f2_excursion = 0.0;
  std::vector<std::complex<double>> eps;
  std::vector<double> eps_bessel;
  std::vector<std::complex<double>> g01;
  std::vector<std::complex<double>> g02;
  std::vector<std::complex<double>> g20;

  std::size_t idx(int n) const { return static_cast<std::size_t>(n + n_max); }
};

/// `p` supplies f1, fc, anharmonicities and couplings at the DC point; f2 is
/// replaced by the modulation average.
ModulatedCouplings modulated_couplings(const DeviceParams& p, const FluxPulse& pulse,
                                       const TransmonSpec& q2, int n_max,
                                       SwVariant variant = SwVariant::Full);

/// Eigenvectors of the idle Hamiltonian with largest overlap on |n1 0 n2>,
/// columns ordered (00, 01, 10, 11); each phased so its bare component is real
/// positive. With `dressed == false` returns the bare basis vectors.
Eigen::Matrix<std::complex<double>, kDim, 4> computational_basis(const DeviceParams& idle,
                                                                 bool dressed = true);

/// Dressed eigenvector for an arbitrary bare state.
CVec27 dressed_state(const DeviceParams& idle, int bare_index);

}  // namespace tcsim
