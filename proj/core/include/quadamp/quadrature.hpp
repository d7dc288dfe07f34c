#pragma once

// Quadrature-basis view of the scattering matrix and phase-sensitive gain.
//
// Quadrature basis order is (X_a, X_b, X_c, Y_a, Y_b, Y_c), with
// X_j = (j^S + j^{I*})/sqrt(2) and Y_j = i(j^{I*} - j^S)/sqrt(2).

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "quadamp/coupled_modes.hpp"

namespace quadamp {

using Matrix6d = Eigen::Matrix<double, 6, 6>;

enum QuadIndex : int { kXa = 0, kXb = 1, kXc = 2, kYa = 3, kYb = 4, kYc = 5 };

constexpr int x_index(Mode m) { return static_cast<int>(m); }
constexpr int y_index(Mode m) { return static_cast<int>(m) + 3; }

struct QuadratureMatrix {
  Matrix6c entries = Matrix6c::Zero();

  cplx operator()(int out, int in) const { return entries(out, in); }
};

/// Unitary rotation as built mode by mode, rows (X_a, Y_a, X_b, Y_b, X_c, Y_c).
const Matrix6c& interleaved_rotation();

/// Same rotation with rows reordered to the quadrature basis order above.
const Matrix6c& quadrature_rotation();

QuadratureMatrix quadrature_matrix(const ScatteringMatrix& s);
ScatteringMatrix mode_basis(const QuadratureMatrix& q);

/// Output power at `out` (both quadratures) for a unit drive on `in` along
/// cos(angle) Y_in + sin(angle) X_in. Angle 0 drives the amplified quadrature
/// in the aligned frame.
double quadrature_power_gain(const QuadratureMatrix& q, Mode in, Mode out, double drive_angle);

/// Real 2x2 map (X_out, Y_out) <- (X_in, Y_in) with its singular values.
/// gain_max/gain_min are power gains of the amplified and squeezed axes.
struct TransferBlock {
  Eigen::Matrix2d map = Eigen::Matrix2d::Zero();
  double gain_max = 0.0;
  double gain_min = 0.0;
  Eigen::Vector2d input_axis = Eigen::Vector2d::UnitX();   // unit drive giving gain_max
  Eigen::Vector2d output_axis = Eigen::Vector2d::UnitX();  // where it lands
};

/// Uses the real part of Q; on resonance Q is real.
TransferBlock transfer_block(const QuadratureMatrix& q, Mode in, Mode out);

struct NoiseFloorInput {
  Matrix6d covariance = Matrix6d::Zero();  // output quadrature covariance
  Mode output = Mode::a;
  double chain_noise = 0.0;  // photons added after the amplifier
};

struct LoPhaseResponse {
  std::vector<double> theta;
  std::vector<double> power_gain;
  std::vector<double> noise_floor;             // empty without a covariance
  std::vector<double> noise_floor_with_chain;  // empty without a covariance
};

/// power_gain(theta) = G_X cos^2 + G_Y sin^2. The noise floor is the output
/// variance along (cos theta, sin theta) in the (X_out, Y_out) plane.
LoPhaseResponse lo_phase_response(const GainSummary& gains, std::span<const double> theta_grid,
                                  const std::optional<NoiseFloorInput>& noise = std::nullopt);

struct SqueezingMetrics {
  double signed_sqrt_product = 0.0;  // sqrt(G_X G_Y) with sign
  double product = 0.0;              // G_X G_Y
  double ideal_squeezing_deviation = 0.0;  // |G_X G_Y - 1|
};

SqueezingMetrics squeezing_metrics(const GainSummary& gains);

}  // namespace quadamp
