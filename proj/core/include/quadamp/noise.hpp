#pragma once

// Output noise of the amplifier: covariance propagation, added noise and
// measurement efficiency. Input covariance is symmetrized: every port adds
// n + 1/2 to the variance of each of its quadratures.

#include <array>

#include <Eigen/Core>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/quadrature.hpp"

namespace quadamp {

struct InputOccupancies {
  std::array<double, 3> external{};  // n_a, n_b, n_c
  std::array<double, 3> internal{};  // loss-port occupancies

  static InputOccupancies vacuum() { return {}; }
};

/// Added noise of the readout chain, in photons, with asymmetric uncertainty.
struct ChainNoise {
  double photons = 19.8;
  double err_minus = 3.3;
  double err_plus = 3.2;

  bool operator==(const ChainNoise&) const = default;
};

struct Interval {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

using Matrix6x12c = Eigen::Matrix<cplx, 6, 12>;

/// Inputs -> external outputs. Columns 0..5 are the external ports in the mode
/// basis order, columns 6..11 the internal loss ports in the same order.
struct ExtendedScattering {
  Matrix6x12c entries = Matrix6x12c::Zero();

  ScatteringMatrix external() const;
};

ExtendedScattering internal_port_scattering(const ModeSet& modes, const PumpSet& pumps,
                                            const DetuningVector& detunings);

/// Quadrature covariance of the outputs. Internal occupancies are ignored
/// (the plain S has no loss ports). Throws NonPhysical when some mode breaks
/// Var(X) Var(Y) - Cov(X,Y)^2 >= 1/4.
Matrix6d output_covariance(const ScatteringMatrix& s, const InputOccupancies& occ);
Matrix6d output_covariance(const ExtendedScattering& s, const InputOccupancies& occ);

/// (1 / (8 |beta_ab|^2)) (1 + G_X^{-1/2})^2 with the positive root.
double added_noise_fpja(double beta_ab_mag, double gain_x);
/// Same with a signed amplitude gain sqrt(G_X); exact for the lossless model.
double added_noise_fpja_signed(double beta_ab_mag, double sqrt_gain_x);

/// 1 / (1 + 2 (n_fpja + n_chain / G_X)).
double system_efficiency(double n_fpja, double n_chain, double gain_x);
/// Efficiency with the chain uncertainty carried through as an interval.
Interval system_efficiency(double n_fpja, const ChainNoise& chain, double gain_x);

struct NoiseReport {
  Matrix6d covariance = Matrix6d::Zero();
  Mode input = Mode::c;
  Mode output = Mode::a;
  double gain_x = 0.0;         // power gain of the amplified axis
  double output_variance = 0.0;  // along the amplified output axis
  double n_add_fpja = 0.0;
  double n_add_total = 0.0;
  double eta_meas = 1.0;
  Interval eta_interval;
  ChainNoise chain;
};

/// Resonant noise analysis of the forward path (c -> a for loop phase > 0,
/// a -> c otherwise), including internal loss ports.
NoiseReport noise_report(const ModeSet& modes, const PumpSet& pumps, const ChainNoise& chain,
                         const InputOccupancies& occ = InputOccupancies::vacuum());

}  // namespace quadamp
