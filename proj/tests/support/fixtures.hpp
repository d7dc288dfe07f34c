#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/stability.hpp"

namespace qtest {

using namespace quadamp;

inline constexpr double kTwoPiMHz = 2.0 * kPi * 1e6;

inline ModeParams mode(Mode m, double f_ghz, double kappa_mhz, double eta) {
  return ModeParams{m, 2.0 * kPi * f_ghz * 1e9, kappa_mhz * kTwoPiMHz, eta * kappa_mhz * kTwoPiMHz};
}

/// Measured device: 83/15/45 MHz linewidths, eta_a = eta_c = 0.99.
inline ModeSet measured_modes(double eta_b = 1.0, double eta_a = 0.99, double eta_c = 0.99) {
  return make_modes(mode(Mode::a, 6.876, 83.0, eta_a), mode(Mode::b, 7.932, 15.0, eta_b),
                    mode(Mode::c, 10.782, 45.0, eta_c));
}

inline ModeSet lossless(ModeSet m) {
  for (auto& p : m) p.kappa_ext = p.kappa;
  return m;
}

inline PumpSet measured_pumps(double loop = kPi / 2, double bb = 2.275) {
  return PumpSet::canonical(1.0, 1.0, 0.5, bb, loop);
}

/// Deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  double phase() { return uniform(-kPi, kPi); }
  int sign() { return uniform(0.0, 1.0) < 0.5 ? -1 : 1; }

  ModeSet modes(double eta_lo = 1.0) {
    return make_modes(mode(Mode::a, 6.0, log_uniform(1, 100), uniform(eta_lo, 1.0)),
                      mode(Mode::b, 8.0, log_uniform(1, 100), uniform(eta_lo, 1.0)),
                      mode(Mode::c, 10.0, log_uniform(1, 100), uniform(eta_lo, 1.0)));
  }

  /// Arbitrary gauge with the given loop phase.
  PumpSet pumps(double ab, double bc, double ac, double bb, double loop) {
    const double pab = phase(), pbc = phase();
    return PumpSet{std::polar(ab, pab), std::polar(bc, pbc), std::polar(ac, pab + pbc - loop),
                   std::polar(bb, phase())};
  }

  /// Directional pump set (|ab| = |bc|, |ac| = 1/2, loop = +-pi/2) with
  /// r = 2|bb|/(1 + 4|ab|^2) drawn below r_max.
  PumpSet directional(double r_max = 0.95) {
    const double ab = uniform(0.05, 2.0);
    const double r = uniform(0.0, r_max);
    return pumps(ab, ab, 0.5, 0.5 * r * (1.0 + 4.0 * ab * ab), sign() * kPi / 2);
  }

  PumpSet any_pumps(double max_mag = 1.5) {
    return pumps(uniform(0, max_mag), uniform(0, max_mag), uniform(0, max_mag), uniform(0, max_mag),
                 phase());
  }

 private:
  std::mt19937_64 rng_;
};

inline double rel_err(std::complex<double> got, std::complex<double> want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Direct eigenvalues of the Langevin matrix, independent of interpolation.
inline double eigen_margin(const ModeSet& modes, const PumpSet& pumps) {
  Eigen::ComplexEigenSolver<Matrix6c> es(langevin_matrix(modes, pumps), false);
  return es.eigenvalues().real().maxCoeff();
}

// Gain formulas written out from their definitions.
inline double oracle_sqrt_gs(double s, double r, double eac) { return eac * (2 * s + r * r - 1) / (1 - r * r); }
inline double oracle_sqrt_gi(double s, double r, double eac) { return eac * 2 * r * s / (1 - r * r); }
inline double oracle_sqrt_gx(double s, double r, double eac) { return eac * (2 * s / (1 - r) - 1); }
inline double oracle_sqrt_gy(double s, double r, double eac) { return eac * (2 * s / (1 + r) - 1); }

}  // namespace qtest
