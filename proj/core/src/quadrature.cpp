#include "quadamp/quadrature.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace quadamp {

namespace {

Matrix6c make_interleaved() {
  const double h = 1.0 / std::sqrt(2.0);
  const cplx i{0.0, 1.0};
  Matrix6c u = Matrix6c::Zero();
  for (int j = 0; j < 3; ++j) {
    u(2 * j, j) = h;
    u(2 * j, j + 3) = h;
    u(2 * j + 1, j) = -i * h;
    u(2 * j + 1, j + 3) = i * h;
  }
  return u;
}

Matrix6c make_ordered() {
  const Matrix6c& u = interleaved_rotation();
  Matrix6c out;
  for (int j = 0; j < 3; ++j) {
    out.row(x_index(static_cast<Mode>(j))) = u.row(2 * j);
    out.row(y_index(static_cast<Mode>(j))) = u.row(2 * j + 1);
  }
  return out;
}

}  // namespace

const Matrix6c& interleaved_rotation() {
  static const Matrix6c u = make_interleaved();
  return u;
}

const Matrix6c& quadrature_rotation() {
  static const Matrix6c u = make_ordered();
  return u;
}

QuadratureMatrix quadrature_matrix(const ScatteringMatrix& s) {
  const Matrix6c& u = quadrature_rotation();
  return QuadratureMatrix{u * s.entries * u.adjoint()};
}

ScatteringMatrix mode_basis(const QuadratureMatrix& q) {
  const Matrix6c& u = quadrature_rotation();
  return ScatteringMatrix{u.adjoint() * q.entries * u};
}

double quadrature_power_gain(const QuadratureMatrix& q, Mode in, Mode out, double drive_angle) {
  const double cy = std::cos(drive_angle), sx = std::sin(drive_angle);
  const cplx to_x = q(x_index(out), y_index(in)) * cy + q(x_index(out), x_index(in)) * sx;
  const cplx to_y = q(y_index(out), y_index(in)) * cy + q(y_index(out), x_index(in)) * sx;
  return std::norm(to_x) + std::norm(to_y);
}

TransferBlock transfer_block(const QuadratureMatrix& q, Mode in, Mode out) {
  const int xi = x_index(in), yi = y_index(in), xo = x_index(out), yo = y_index(out);
  TransferBlock b;
  b.map << q(xo, xi).real(), q(xo, yi).real(), q(yo, xi).real(), q(yo, yi).real();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(b.map, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  b.gain_max = sv(0) * sv(0);
  b.gain_min = sv(1) * sv(1);
  b.input_axis = svd.matrixV().col(0);
  b.output_axis = svd.matrixU().col(0);
  return b;
}

LoPhaseResponse lo_phase_response(const GainSummary& gains, std::span<const double> theta_grid,
                                  const std::optional<NoiseFloorInput>& noise) {
  const double gx = gains.sqrt_gx * gains.sqrt_gx;
  const double gy = gains.sqrt_gy * gains.sqrt_gy;
  LoPhaseResponse out;
  out.theta.assign(theta_grid.begin(), theta_grid.end());
  out.power_gain.reserve(theta_grid.size());
  for (double t : theta_grid) {
    const double c = std::cos(t), s = std::sin(t);
    out.power_gain.push_back(gx * c * c + gy * s * s);
  }
  if (noise) {
    const int xi = x_index(noise->output), yi = y_index(noise->output);
    const auto& cov = noise->covariance;
    for (double t : theta_grid) {
      const double c = std::cos(t), s = std::sin(t);
      const double var = c * c * cov(xi, xi) + s * s * cov(yi, yi) + 2.0 * c * s * cov(xi, yi);
      out.noise_floor.push_back(var);
      out.noise_floor_with_chain.push_back(var + noise->chain_noise);
    }
  }
  return out;
}

SqueezingMetrics squeezing_metrics(const GainSummary& g) {
  const double eta2 = g.eta_prefactor * g.eta_prefactor;
  SqueezingMetrics m;
  m.signed_sqrt_product = eta2 * (1.0 - 4.0 * g.s * (1.0 - g.s) / (1.0 - g.r * g.r));
  m.product = m.signed_sqrt_product * m.signed_sqrt_product;
  m.ideal_squeezing_deviation = std::abs(m.product - 1.0);
  return m;
}

}  // namespace quadamp
