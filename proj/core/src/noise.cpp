#include "quadamp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "quadamp/error.hpp"

namespace quadamp {

namespace {

using Matrix12c = Eigen::Matrix<cplx, 12, 12>;

template <typename Derived>
Matrix6d to_quadratures(const Eigen::MatrixBase<Derived>& s, const Eigen::VectorXd& input_var,
                        double herm_tol) {
  const Matrix6c& u = quadrature_rotation();
  const Matrix6c cov = u * s * input_var.asDiagonal() * s.adjoint() * u.adjoint();

  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.adjoint()).cwiseAbs().maxCoeff() > herm_tol * scale ||
      cov.diagonal().imag().cwiseAbs().maxCoeff() > herm_tol * scale)
    throw Error(ErrorKind::NonPhysical, "output covariance is not Hermitian");

  Matrix6d out = cov.real();
  for (int j = 0; j < 3; ++j) {
    const int x = x_index(static_cast<Mode>(j)), y = y_index(static_cast<Mode>(j));
    const double det = out(x, x) * out(y, y) - out(x, y) * out(y, x);
    if (det < 0.25 - 1e-9 * std::max(1.0, out(x, x) * out(y, y))) {
      throw Error(ErrorKind::NonPhysical,
                  std::string("mode ") + mode_name(static_cast<Mode>(j)) +
                      " violates the uncertainty bound: Var(X)Var(Y)-Cov^2 = " + std::to_string(det));
    }
  }
  return out;
}

void check_occupancies(const InputOccupancies& occ) {
  for (int j = 0; j < 3; ++j) {
    if (!(occ.external[j] >= 0.0) || !(occ.internal[j] >= 0.0))
      throw Error(ErrorKind::ValidationError, "occupancies must be >= 0");
  }
}

}  // namespace

ScatteringMatrix ExtendedScattering::external() const {
  return ScatteringMatrix{entries.leftCols<6>()};
}

ExtendedScattering internal_port_scattering(const ModeSet& modes, const PumpSet& pumps,
                                            const DetuningVector& detunings) {
  validate(modes);
  const CouplingMatrix m = build_coupling_matrix(pumps, detunings);
  Eigen::PartialPivLU<Matrix6c> lu(m.entries);
  if (!(lu.rcond() >= kMinReciprocalCondition))
    throw Error(ErrorKind::NearSingular, "coupling matrix is near singular");
  const Matrix6c inv = lu.inverse();

  Eigen::Matrix<cplx, 6, 1> h_ext, h_int;
  for (int j = 0; j < 3; ++j) {
    const double eta = modes[j].eta();
    h_ext(j) = h_ext(j + 3) = std::sqrt(eta);
    h_int(j) = h_int(j + 3) = std::sqrt(std::max(0.0, 1.0 - eta));
  }
  const cplx i{0.0, 1.0};
  ExtendedScattering out;
  out.entries.leftCols<6>() =
      i * h_ext.asDiagonal() * inv * h_ext.asDiagonal() - Matrix6c::Identity();
  out.entries.rightCols<6>() = i * h_ext.asDiagonal() * inv * h_int.asDiagonal();
  return out;
}

Matrix6d output_covariance(const ScatteringMatrix& s, const InputOccupancies& occ) {
  check_occupancies(occ);
  Eigen::VectorXd var(6);
  for (int j = 0; j < 3; ++j) var(j) = var(j + 3) = occ.external[j] + 0.5;
  return to_quadratures(s.entries, var, 1e-9);
}

Matrix6d output_covariance(const ExtendedScattering& s, const InputOccupancies& occ) {
  check_occupancies(occ);
  Eigen::VectorXd var(12);
  for (int j = 0; j < 3; ++j) {
    var(j) = var(j + 3) = occ.external[j] + 0.5;
    var(j + 6) = var(j + 9) = occ.internal[j] + 0.5;
  }
  return to_quadratures(s.entries, var, 1e-9);
}

double added_noise_fpja(double beta_ab_mag, double gain_x) {
  return added_noise_fpja_signed(beta_ab_mag, std::sqrt(gain_x));
}

double added_noise_fpja_signed(double beta_ab_mag, double sqrt_gain_x) {
  const double t = 1.0 + 1.0 / sqrt_gain_x;
  return t * t / (8.0 * beta_ab_mag * beta_ab_mag);
}

double system_efficiency(double n_fpja, double n_chain, double gain_x) {
  return 1.0 / (1.0 + 2.0 * (n_fpja + n_chain / gain_x));
}

Interval system_efficiency(double n_fpja, const ChainNoise& chain, double gain_x) {
  Interval e;
  e.value = system_efficiency(n_fpja, chain.photons, gain_x);
  e.lo = system_efficiency(n_fpja, chain.photons + chain.err_plus, gain_x);
  e.hi = system_efficiency(n_fpja, std::max(0.0, chain.photons - chain.err_minus), gain_x);
  return e;
}

NoiseReport noise_report(const ModeSet& modes, const PumpSet& pumps, const ChainNoise& chain,
                         const InputOccupancies& occ) {
  const DetuningVector on_resonance = DetuningVector::resonant(modes, 0.0);
  const ExtendedScattering ext = internal_port_scattering(modes, pumps, on_resonance);

  NoiseReport rep;
  rep.chain = chain;
  rep.covariance = output_covariance(ext, occ);
  if (pumps.loop_phase() < 0.0) std::swap(rep.input, rep.output);

  const TransferBlock block = transfer_block(quadrature_matrix(ext.external()), rep.input, rep.output);
  if (!(block.gain_max > 0.0))
    throw Error(ErrorKind::NonPhysical, "no transmission on the forward path");
  rep.gain_x = block.gain_max;

  const int xo = x_index(rep.output), yo = y_index(rep.output);
  Eigen::Matrix2d plane;
  plane << rep.covariance(xo, xo), rep.covariance(xo, yo), rep.covariance(yo, xo),
      rep.covariance(yo, yo);
  rep.output_variance = block.output_axis.dot(plane * block.output_axis);

  rep.n_add_fpja = rep.output_variance / rep.gain_x - 0.5;
  rep.n_add_total = rep.n_add_fpja + chain.photons / rep.gain_x;
  rep.eta_meas = 1.0 / (1.0 + 2.0 * rep.n_add_total);
  rep.eta_interval = system_efficiency(rep.n_add_fpja, chain, rep.gain_x);
  return rep;
}

}  // namespace quadamp
