#pragma once

// Linear stability of the Langevin equations. The characteristic polynomial
// P(lambda) = det(lambda - L), L = -K^2/2 + i K B K, with K = diag(sqrt(kappa))
// and B the pump couplings, is monic of degree 6 in rad/s.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "quadamp/coupled_modes.hpp"

namespace quadamp {

struct CubicFactor {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;  // lambda^3 + b1 lambda^2 + b2 lambda + b3

  bool positive() const { return b1 > 0.0 && b2 > 0.0 && b3 > 0.0; }
  bool hurwitz() const { return positive() && b1 * b2 > b3; }
};

struct StabilityReport {
  std::optional<CubicFactor> plus, minus;
  double b_phi = 0.0;
  bool coefficients_positive = false;  // all six factor coefficients > 0

  std::vector<cplx> roots;  // rad/s
  bool stable = false;
  double margin = 0.0;  // max Re(lambda), rad/s; only meaningful with roots
};

/// Factorized coefficients for |beta_ac| = 1/2, |beta_ab| = |beta_bc|, lossless
/// and resonant. P = P+ P- + b_phi, b_phi = (ka kb kc)^2 |beta_ab|^4 cos^2(loop).
/// The verdict is Routh-Hurwitz: per cubic factor when b_phi = 0, otherwise
/// on the full sextic.
StabilityReport routh_coefficients(const ModeSet& modes, double beta_ab_mag, double beta_bb_mag,
                                   double loop_phase);

/// Checks the factorization regime first; throws OutOfRegime otherwise.
StabilityReport routh_coefficients(const ModeSet& modes, const PumpSet& pumps);

/// True when every root of the real polynomial (highest degree first) has a
/// negative real part, by the Routh array.
bool routh_hurwitz_stable(std::span<const double> coeffs);

Matrix6c langevin_matrix(const ModeSet& modes, const PumpSet& pumps);

/// det(lambda - L) evaluated directly by LU.
cplx characteristic_determinant(const ModeSet& modes, const PumpSet& pumps, cplx lambda);

struct CharacteristicPolynomial {
  Eigen::Matrix<cplx, 7, 1> coeffs;  // in x = lambda / scale, lowest degree first
  double scale = 1.0;                // rad/s
  double reciprocal_condition = 0.0;

  cplx operator()(cplx lambda) const;  // P(lambda) in (rad/s)^6
};

/// Interpolates P at 7 Chebyshev nodes on [-scale, scale]. scale defaults to
/// the largest kappa. Throws InterpolationIllConditioned when the
/// Vandermonde reciprocal condition is below 1e-6.
CharacteristicPolynomial characteristic_polynomial(const ModeSet& modes, const PumpSet& pumps,
                                                   std::optional<double> scale = std::nullopt);

/// Roots from the interpolated polynomial via its companion matrix.
StabilityReport characteristic_roots(const ModeSet& modes, const PumpSet& pumps,
                                     std::optional<double> scale = std::nullopt);

enum class CellState { stable, unstable, unknown };

struct StabilityRegion {
  std::vector<double> gain_db;     // direct gain G_S at loop phase +pi/2
  std::vector<double> loop_phase;  // rad
  std::vector<double> r;           // per gain row; NaN when unreachable
  std::vector<std::vector<CellState>> cells;    // [gain][phase]
  std::vector<std::vector<double>> margin;      // rad/s, NaN for unknown
  std::optional<double> min_unstable_gain_db;
};

/// Gain axis: r solves sqrt(G_S) = sqrt(eta_a eta_c)(2s + r^2 - 1)/(1 - r^2)
/// for the s set by |beta_ab|; beta_bb = r(1 + 4|beta_ab|^2)/2 at phase -pi/2.
/// Conversion magnitudes come from `pumps`.
StabilityRegion stability_region(const ModeSet& modes, const PumpSet& pumps,
                                 std::span<const double> gain_db_grid,
                                 std::span<const double> loop_phase_grid);

struct PerformanceBounds {
  double min_sqrt_gy = 0.0;
  double min_n_add = 0.0;
  double max_eta = 0.0;
};

PerformanceBounds performance_bounds(const ModeSet& modes);

}  // namespace quadamp
