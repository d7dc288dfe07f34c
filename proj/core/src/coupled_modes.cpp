#include "quadamp/coupled_modes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "quadamp/error.hpp"

namespace quadamp {

namespace {

constexpr cplx kI{0.0, 1.0};

// Index of the first row at which the predicate stops holding, walking from
// `start` in direction `step`; -1 when it holds up to the grid edge.
template <typename Pred>
int walk_until(const std::vector<double>& values, int start, int step, Pred holds) {
  for (int i = start; i >= 0 && i < static_cast<int>(values.size()); i += step) {
    if (!holds(values[i])) return i;
  }
  return -1;
}

double crossing(double x0, double y0, double x1, double y1, double level) {
  if (y1 == y0) return 0.5 * (x0 + x1);
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

// Width of the band around `center` where values stay >= level.
std::optional<double> band_width(const std::vector<double>& x, const std::vector<double>& y,
                                 int center, double level) {
  if (center < 0 || y[center] < level) return std::nullopt;
  auto above = [level](double v) { return v >= level; };
  const int right = walk_until(y, center, +1, above);
  const int left = walk_until(y, center, -1, above);
  if (right < 0 || left < 0) return std::nullopt;
  const double hi = crossing(x[right - 1], y[right - 1], x[right], y[right], level);
  const double lo = crossing(x[left + 1], y[left + 1], x[left], y[left], level);
  return hi - lo;
}

}  // namespace

char mode_name(Mode m) { return "abc"[static_cast<int>(m)]; }

void validate(const ModeSet& modes) {
  std::string problems;
  for (int i = 0; i < 3; ++i) {
    const auto& m = modes[i];
    const std::string name = std::string("mode ") + "abc"[i];
    if (static_cast<int>(m.label) != i) problems += name + ": label out of order; ";
    if (!(m.kappa > 0.0)) problems += name + ": kappa must be > 0; ";
    if (!(m.kappa_ext >= 0.0)) problems += name + ": kappa_ext must be >= 0; ";
    if (m.kappa_ext > m.kappa) problems += name + ": kappa_ext exceeds kappa; ";
  }
  if (!problems.empty()) throw Error(ErrorKind::ValidationError, problems);
}

ModeSet make_modes(const ModeParams& a, const ModeParams& b, const ModeParams& c) {
  ModeSet modes{a, b, c};
  validate(modes);
  return modes;
}

double wrap_phase(double phase) {
  double w = std::remainder(phase, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double PumpSet::loop_phase() const {
  return wrap_phase(std::arg(beta_ab) + std::arg(beta_bc) - std::arg(beta_ac));
}

PumpSet PumpSet::canonical(double ab, double bc, double ac, double bb, double loop_phase,
                           double bb_phase) {
  PumpSet p;
  p.beta_ab = std::polar(ab, loop_phase);
  p.beta_bc = bc;
  p.beta_ac = ac;
  p.beta_bb = std::polar(bb, bb_phase);
  return p;
}

DetuningVector DetuningVector::resonant(const ModeSet& modes, double delta) {
  DetuningVector d;
  for (int j = 0; j < 3; ++j) {
    d.signal[j] = cplx{delta / modes[j].kappa, 0.5};
    d.idler[j] = cplx{-delta / modes[j].kappa, 0.5};
  }
  return d;
}

DetuningVector DetuningVector::from_offsets(const ModeSet& modes,
                                            const std::array<double, 3>& signal_offset,
                                            const std::array<double, 3>& idler_offset) {
  DetuningVector d;
  for (int j = 0; j < 3; ++j) {
    d.signal[j] = cplx{signal_offset[j] / modes[j].kappa, 0.5};
    d.idler[j] = cplx{idler_offset[j] / modes[j].kappa, 0.5};
  }
  return d;
}

bool DetuningVector::is_resonant(double tol) const {
  for (int j = 0; j < 3; ++j) {
    if (std::abs(signal[j] + std::conj(idler[j])) > tol * (1.0 + std::abs(signal[j]))) return false;
  }
  return true;
}

CouplingMatrix build_coupling_matrix(const PumpSet& p, const DetuningVector& d) {
  CouplingMatrix m;
  auto& e = m.entries;
  // signal block
  e(0, 0) = d.signal[0];
  e(0, 1) = p.beta_ab;
  e(0, 2) = p.beta_ac;
  e(1, 0) = std::conj(p.beta_ab);
  e(1, 1) = d.signal[1];
  e(1, 2) = p.beta_bc;
  e(2, 0) = std::conj(p.beta_ac);
  e(2, 1) = std::conj(p.beta_bc);
  e(2, 2) = d.signal[2];
  // idler block
  e(3, 3) = -std::conj(d.idler[0]);
  e(3, 4) = -std::conj(p.beta_ab);
  e(3, 5) = -std::conj(p.beta_ac);
  e(4, 3) = -p.beta_ab;
  e(4, 4) = -std::conj(d.idler[1]);
  e(4, 5) = -std::conj(p.beta_bc);
  e(5, 3) = -p.beta_ac;
  e(5, 4) = -p.beta_bc;
  e(5, 5) = -std::conj(d.idler[2]);
  // amplification of b
  e(1, 4) = p.beta_bb;
  e(4, 1) = -std::conj(p.beta_bb);
  return m;
}

ScatteringMatrix scattering_matrix(const CouplingMatrix& m, const ModeSet& modes) {
  const Eigen::PartialPivLU<Matrix6c> lu(m.entries);
  const double rcond = lu.rcond();
  if (!(rcond >= kMinReciprocalCondition)) {
    throw Error(ErrorKind::NearSingular,
                "coupling matrix is near singular (rcond " + std::to_string(rcond) +
                    "); configuration is at or beyond an oscillation threshold");
  }
  Eigen::Matrix<double, 6, 1> h;
  for (int j = 0; j < 3; ++j) h(j) = h(j + 3) = std::sqrt(modes[j].eta());

  const Matrix6c inv = lu.inverse();
  ScatteringMatrix s;
  s.entries = kI * (h.asDiagonal() * inv * h.asDiagonal());
  s.entries -= Matrix6c::Identity();
  return s;
}

ScatteringMatrix simulate(const ModeSet& modes, const PumpSet& pumps,
                          const DetuningVector& detunings) {
  return scattering_matrix(build_coupling_matrix(pumps, detunings), modes);
}

ClosedFormDiagnostics closed_form_scattering(const ModeSet& modes, const PumpSet& p,
                                             const DetuningVector& d) {
  if (!d.is_resonant()) {
    throw Error(ErrorKind::OutOfRegime, "closed forms require resonant pumps");
  }
  const cplx da = d.signal[0], db = d.signal[1], dc = d.signal[2];
  const cplx ab = p.beta_ab, bc = p.beta_bc, ac = p.beta_ac, bb = p.beta_bb;
  const double ab2 = std::norm(ab), bc2 = std::norm(bc), ac2 = std::norm(ac), bb2 = std::norm(bb);
  const double ea = modes[0].eta(), ec = modes[2].eta();
  const double eac = std::sqrt(ea * ec);

  ClosedFormDiagnostics out;
  const cplx loop = ab * bc * std::conj(ac);
  const cplx c = da * db * dc - bc2 * da - ac2 * db - ab2 * dc - loop - std::conj(loop);
  if (std::abs(c) < 1e-14) {
    throw Error(ErrorKind::DegenerateLoop, "idler loop determinant vanishes");
  }
  const cplx c_signal = da * db * dc - bc2 * da - ac2 * db - ab2 * dc + loop + std::conj(loop);
  const cplx outer = da * dc - ac2;
  const cplx det = c * c_signal + bb2 * outer * outer;
  const cplx beff = db + bb2 / c * outer;

  out.loop_determinant = c;
  out.delta_b_eff = beff;
  out.determinant = det;

  const cplx pre = kI / det;
  out.s_aa = pre * ea * c * (beff * dc - bc2) - 1.0;
  out.s_cc = pre * ec * c * (beff * da - ab2) - 1.0;
  out.s_aI_aS = pre * ea * std::conj(bb) *
                (bc * bc * std::conj(ac) * std::conj(ac) - std::conj(ab) * std::conj(ab) * dc * dc);
  out.s_cI_cS = pre * ec * std::conj(bb) *
                (ac * ac * std::conj(ab) * std::conj(ab) - bc * bc * da * da);
  out.s_ac = pre * eac * c * (ab * bc - ac * beff);
  out.s_ca = pre * eac * c * (std::conj(ab) * std::conj(bc) - std::conj(ac) * beff);
  out.s_aS_cI = pre * eac * bb * (ab * dc - ac * std::conj(bc)) * (std::conj(bc) * da + ab * std::conj(ac));
  return out;
}

double conversion_ratio(double beta_ab_mag) {
  const double x = 4.0 * beta_ab_mag * beta_ab_mag;
  return x / (1.0 + x);
}

double amplification_ratio(double beta_ab_mag, double beta_bb_mag) {
  return 2.0 * beta_bb_mag / (1.0 + 4.0 * beta_ab_mag * beta_ab_mag);
}

double power_db(cplx amplitude) { return 10.0 * std::log10(std::norm(amplitude)); }
double power_db(double power) { return 10.0 * std::log10(power); }

GainSummary gains_from_ratios(double s, double r, double eta_a, double eta_c) {
  if (!(r < 1.0)) {
    throw Error(ErrorKind::PoleReached, "r >= 1: gain diverges, amplifier is unstable");
  }
  const double eac = std::sqrt(eta_a * eta_c);
  const double den = 1.0 - r * r;
  GainSummary g;
  g.s = s;
  g.r = r;
  g.eta_prefactor = eac;
  g.sqrt_gs = eac * (2.0 * s + r * r - 1.0) / den;
  g.sqrt_gi = eac * 2.0 * r * s / den;
  g.sqrt_gx = g.sqrt_gs + g.sqrt_gi;
  g.sqrt_gy = g.sqrt_gs - g.sqrt_gi;
  return g;
}

GainSummary gain_summary(const ModeSet& modes, const PumpSet& pumps) {
  const double ab = std::abs(pumps.beta_ab);
  const double bc = std::abs(pumps.beta_bc);
  if (std::abs(ab - bc) > 1e-9) {
    throw Error(ErrorKind::AsymmetricConversion,
                "|beta_ab| != |beta_bc|: s and r are undefined as scalars");
  }
  return gains_from_ratios(conversion_ratio(ab), amplification_ratio(ab, std::abs(pumps.beta_bb)),
                           modes[0].eta(), modes[2].eta());
}

Matrix4c reduced_scattering_ac(double s, double r, double eta_a, double eta_c, double phi_bb) {
  if (!(r < 1.0)) throw Error(ErrorKind::PoleReached, "r >= 1: gain pole reached");
  const GainSummary g = gains_from_ratios(s, r, eta_a, eta_c);
  const double eac = std::sqrt(eta_a * eta_c);
  const cplx amp = std::polar(1.0, phi_bb);
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = eta_a - 1.0;
  m(0, 1) = -kI * g.sqrt_gs;
  m(0, 3) = -amp * g.sqrt_gi;
  m(1, 0) = kI * eac;
  m(1, 1) = eta_c - 1.0;
  m(2, 1) = -std::conj(amp) * g.sqrt_gi;
  m(2, 2) = eta_a - 1.0;
  m(2, 3) = kI * g.sqrt_gs;
  m(3, 2) = -kI * eac;
  m(3, 3) = eta_c - 1.0;
  return m;
}

SweepResult sweep_scattering(const ModeSet& modes, const PumpSet& pumps,
                             std::span<const double> delta_grid, double return_loss_threshold_db) {
  for (std::size_t i = 1; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > delta_grid[i - 1])) {
      throw Error(ErrorKind::ValidationError, "detuning grid must be strictly increasing");
    }
  }
  SweepResult out;
  if (pumps.loop_phase() < 0.0) {
    out.forward_out = kSignalC;
    out.forward_in = kSignalA;
  }
  out.rows.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    SweepRow row{delta, std::nullopt};
    try {
      row.s = simulate(modes, pumps, DetuningVector::resonant(modes, delta));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NearSingular) throw;
    }
    out.rows.push_back(std::move(row));
  }

  // Band analysis over the well-conditioned points only.
  std::vector<double> x, gain, worst_reflection;
  for (const auto& row : out.rows) {
    if (!row.s) continue;
    x.push_back(row.delta);
    gain.push_back(power_db((*row.s)(out.forward_out, out.forward_in)));
    const double ra = power_db((*row.s)(kSignalA, kSignalA));
    const double rc = power_db((*row.s)(kSignalC, kSignalC));
    // negated so that "inside the band" means value >= -threshold
    worst_reflection.push_back(-std::max(ra, rc));
  }
  if (x.empty()) return out;

  const int peak = static_cast<int>(std::max_element(gain.begin(), gain.end()) - gain.begin());
  out.bandwidth_3db = band_width(x, gain, peak, gain[peak] - 3.0);
  out.return_loss_band = band_width(x, worst_reflection, peak, return_loss_threshold_db);
  return out;
}

}  // namespace quadamp
