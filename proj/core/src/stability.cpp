#include "quadamp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "quadamp/error.hpp"

namespace quadamp {

namespace {

constexpr double kRegimeTol = 1e-9;
constexpr double kMinVandermondeRcond = 1e-6;

CubicFactor factor(double ka, double kb, double kc, double ab2, double sign_bb) {
  const double conv = 4.0 * ab2 + 1.0 - 2.0 * sign_bb;
  CubicFactor f;
  f.b1 = 0.5 * kb * (1.0 - 2.0 * sign_bb) + 0.5 * (ka + kc);
  f.b2 = 0.25 * kb * (ka + kc) * conv + 0.5 * ka * kc;
  f.b3 = 0.25 * ka * kb * kc * conv;
  return f;
}

std::array<double, 7> product(const CubicFactor& p, const CubicFactor& m) {
  const std::array<double, 4> a{1.0, p.b1, p.b2, p.b3};
  const std::array<double, 4> b{1.0, m.b1, m.b2, m.b3};
  std::array<double, 7> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

bool routh_hurwitz_stable(std::span<const double> coeffs) {
  const auto n = coeffs.size();
  if (n == 0 || coeffs[0] == 0.0) return false;
  const double sgn = coeffs[0] > 0.0 ? 1.0 : -1.0;

  const std::size_t width = (n + 1) / 2;
  std::vector<double> prev(width, 0.0), cur(width, 0.0);
  for (std::size_t i = 0; i < n; ++i) (i % 2 == 0 ? prev : cur)[i / 2] = sgn * coeffs[i];

  const std::size_t degree = n - 1;
  for (std::size_t row = 1; row < degree; ++row) {
    if (!(cur[0] > 0.0)) return false;
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j)
      next[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return degree == 0 || cur[0] > 0.0;
}

StabilityReport routh_coefficients(const ModeSet& modes, double beta_ab_mag, double beta_bb_mag,
                                   double loop_phase) {
  validate(modes);
  const double ka = modes[0].kappa, kb = modes[1].kappa, kc = modes[2].kappa;
  const double ab2 = beta_ab_mag * beta_ab_mag;

  StabilityReport rep;
  rep.plus = factor(ka, kb, kc, ab2, beta_bb_mag);
  rep.minus = factor(ka, kb, kc, ab2, -beta_bb_mag);
  rep.coefficients_positive = rep.plus->positive() && rep.minus->positive();

  const double c = std::cos(loop_phase);
  const double k3 = ka * kb * kc;
  rep.b_phi = std::abs(c) < 1e-12 ? 0.0 : k3 * k3 * ab2 * ab2 * c * c;

  if (rep.b_phi == 0.0) {
    rep.stable = rep.plus->hurwitz() && rep.minus->hurwitz();
  } else {
    auto poly = product(*rep.plus, *rep.minus);
    poly[6] += rep.b_phi;
    rep.stable = routh_hurwitz_stable(poly);
  }
  return rep;
}

StabilityReport routh_coefficients(const ModeSet& modes, const PumpSet& pumps) {
  const double ab = std::abs(pumps.beta_ab);
  if (std::abs(ab - std::abs(pumps.beta_bc)) > kRegimeTol ||
      std::abs(std::abs(pumps.beta_ac) - 0.5) > kRegimeTol) {
    throw Error(ErrorKind::OutOfRegime,
                "factorized polynomial needs |beta_ab| = |beta_bc| and |beta_ac| = 1/2");
  }
  return routh_coefficients(modes, ab, std::abs(pumps.beta_bb), pumps.loop_phase());
}

Matrix6c langevin_matrix(const ModeSet& modes, const PumpSet& pumps) {
  Matrix6c b = build_coupling_matrix(pumps, DetuningVector{}).entries;
  b.diagonal().setZero();
  Eigen::Matrix<cplx, 6, 1> k;
  for (int j = 0; j < 3; ++j) k(j) = k(j + 3) = std::sqrt(modes[j].kappa);
  const cplx i{0.0, 1.0};
  Matrix6c l = i * k.asDiagonal() * b * k.asDiagonal();
  l.diagonal() -= 0.5 * k.cwiseAbs2().cast<cplx>();
  return l;
}

cplx characteristic_determinant(const ModeSet& modes, const PumpSet& pumps, cplx lambda) {
  Matrix6c a = -langevin_matrix(modes, pumps);
  a.diagonal().array() += lambda;
  return a.determinant();
}

cplx CharacteristicPolynomial::operator()(cplx lambda) const {
  const cplx x = lambda / scale;
  cplx acc = coeffs(6);
  for (int k = 5; k >= 0; --k) acc = acc * x + coeffs(k);
  return acc * std::pow(scale, 6);
}

CharacteristicPolynomial characteristic_polynomial(const ModeSet& modes, const PumpSet& pumps,
                                                   std::optional<double> scale) {
  validate(modes);
  CharacteristicPolynomial poly;
  poly.scale = scale.value_or(std::max({modes[0].kappa, modes[1].kappa, modes[2].kappa}));
  if (!(poly.scale > 0.0) || !std::isfinite(poly.scale))
    throw Error(ErrorKind::InterpolationIllConditioned, "sample scale must be positive");

  // Work with the scaled matrix so P(x) = det(x - L/scale) stays O(1).
  const Matrix6c l = langevin_matrix(modes, pumps) / poly.scale;
  Eigen::Matrix<double, 7, 7> vander;
  Eigen::Matrix<cplx, 7, 1> values;
  for (int k = 0; k < 7; ++k) {
    const double x = std::cos((2.0 * k + 1.0) * kPi / 14.0);
    double p = 1.0;
    for (int d = 0; d < 7; ++d, p *= x) vander(k, d) = p;
    Matrix6c a = -l;
    a.diagonal().array() += x;
    values(k) = a.determinant();
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(vander);
  poly.reciprocal_condition = lu.rcond();
  if (!(poly.reciprocal_condition >= kMinVandermondeRcond))
    throw Error(ErrorKind::InterpolationIllConditioned,
                "Vandermonde system lost more than 6 digits; rescale the sample points");
  poly.coeffs = lu.solve(values.real()).cast<cplx>() + cplx{0.0, 1.0} * lu.solve(values.imag()).cast<cplx>();
  return poly;
}

StabilityReport characteristic_roots(const ModeSet& modes, const PumpSet& pumps,
                                     std::optional<double> scale) {
  const CharacteristicPolynomial poly = characteristic_polynomial(modes, pumps, scale);
  const cplx lead = poly.coeffs(6);
  // P is monic, so the recovered leading coefficient shows the digits lost.
  if (!(std::abs(lead - 1.0) < kMinVandermondeRcond))
    throw Error(ErrorKind::InterpolationIllConditioned,
                "interpolated polynomial lost more than 6 digits; rescale the sample points");

  Matrix6c companion = Matrix6c::Zero();
  for (int k = 1; k < 6; ++k) companion(k, k - 1) = 1.0;
  for (int k = 0; k < 6; ++k) companion(k, 5) = -poly.coeffs(k) / lead;
  Eigen::ComplexEigenSolver<Matrix6c> es(companion, false);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::InterpolationIllConditioned, "companion eigensolve did not converge");

  StabilityReport rep;
  rep.margin = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 6; ++k) {
    const cplx root = es.eigenvalues()(k) * poly.scale;
    rep.roots.push_back(root);
    rep.margin = std::max(rep.margin, root.real());
  }
  std::sort(rep.roots.begin(), rep.roots.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  rep.stable = rep.margin < 0.0;
  return rep;
}

StabilityRegion stability_region(const ModeSet& modes, const PumpSet& pumps,
                                 std::span<const double> gain_db_grid,
                                 std::span<const double> loop_phase_grid) {
  validate(modes);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double ab = std::abs(pumps.beta_ab), bc = std::abs(pumps.beta_bc), ac = std::abs(pumps.beta_ac);
  const double s = conversion_ratio(ab);
  const double eac = std::sqrt(modes[0].eta() * modes[2].eta());

  StabilityRegion reg;
  reg.gain_db.assign(gain_db_grid.begin(), gain_db_grid.end());
  reg.loop_phase.assign(loop_phase_grid.begin(), loop_phase_grid.end());

  for (double gdb : gain_db_grid) {
    const double g = std::pow(10.0, gdb / 20.0) / eac;
    const double r2 = 1.0 - 2.0 * s / (1.0 + g);
    const double r = (std::isfinite(r2) && r2 >= 0.0) ? std::sqrt(r2) : nan;
    reg.r.push_back(r);

    std::vector<CellState> row;
    std::vector<double> margins;
    for (double phi : loop_phase_grid) {
      if (std::isnan(r)) {
        row.push_back(CellState::unknown);
        margins.push_back(nan);
        continue;
      }
      const double bb = 0.5 * r * (1.0 + 4.0 * ab * ab);
      try {
        const StabilityReport rep =
            characteristic_roots(modes, PumpSet::canonical(ab, bc, ac, bb, phi));
        row.push_back(rep.stable ? CellState::stable : CellState::unstable);
        margins.push_back(rep.margin);
      } catch (const Error&) {
        row.push_back(CellState::unknown);
        margins.push_back(nan);
      }
      if (row.back() == CellState::unstable &&
          (!reg.min_unstable_gain_db || gdb < *reg.min_unstable_gain_db))
        reg.min_unstable_gain_db = gdb;
    }
    reg.cells.push_back(std::move(row));
    reg.margin.push_back(std::move(margins));
  }
  return reg;
}

PerformanceBounds performance_bounds(const ModeSet& modes) {
  validate(modes);
  const double ka = modes[0].kappa, kb = modes[1].kappa, kc = modes[2].kappa;
  const double total = ka + kb + kc;
  return PerformanceBounds{kb / total, kb / (2.0 * (ka + kc)), (ka + kc) / total};
}

}  // namespace quadamp
