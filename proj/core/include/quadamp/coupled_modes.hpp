#pragma once

// Three-mode, four-pump coupled-mode model: coupling matrix, numeric and
// closed-form scattering, gain parameters and detuning sweeps.
//
// All 6x6 matrices use the fixed basis (a^S, b^S, c^S, a^{I*}, b^{I*}, c^{I*}).
// Rates are angular (rad/s); couplings and detunings are normalized by the
// mode linewidths.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace quadamp {

using cplx = std::complex<double>;
using Matrix6c = Eigen::Matrix<cplx, 6, 6>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

inline constexpr double kPi = 3.14159265358979323846;

enum class Mode : int { a = 0, b = 1, c = 2 };

/// Row/column index in the mode basis.
enum Port : int {
  kSignalA = 0,
  kSignalB = 1,
  kSignalC = 2,
  kIdlerA = 3,
  kIdlerB = 4,
  kIdlerC = 5,
};

constexpr int signal_port(Mode m) { return static_cast<int>(m); }
constexpr int idler_port(Mode m) { return static_cast<int>(m) + 3; }

char mode_name(Mode m);

struct ModeParams {
  Mode label = Mode::a;
  double omega = 0.0;      // rad/s
  double kappa = 1.0;      // total loss rate, rad/s
  double kappa_ext = 1.0;  // external coupling rate, rad/s

  double eta() const { return kappa_ext / kappa; }
  double kappa_int() const { return kappa - kappa_ext; }

  bool operator==(const ModeParams&) const = default;
};

/// Modes indexed by Mode; entry i must carry label i.
using ModeSet = std::array<ModeParams, 3>;

/// Checks kappa > 0, 0 <= kappa_ext <= kappa and label order. Throws
/// ValidationError naming every violation.
void validate(const ModeSet& modes);

ModeSet make_modes(const ModeParams& a, const ModeParams& b, const ModeParams& c);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double phase);

struct PumpSet {
  cplx beta_ab{};
  cplx beta_bc{};
  cplx beta_ac{};
  cplx beta_bb{};

  double loop_phase() const;
  double bb_phase() const { return std::arg(beta_bb); }

  /// Places the loop phase on beta_ab and leaves beta_bc, beta_ac real.
  /// With bb_phase = -pi/2 this frame puts the amplified quadrature on
  /// X_a <- Y_c for loop_phase = +pi/2.
  static PumpSet canonical(double ab, double bc, double ac, double bb, double loop_phase,
                           double bb_phase = -kPi / 2);

  bool operator==(const PumpSet&) const = default;
};

struct DetuningVector {
  std::array<cplx, 3> signal{cplx{0.0, 0.5}, cplx{0.0, 0.5}, cplx{0.0, 0.5}};
  std::array<cplx, 3> idler{cplx{0.0, 0.5}, cplx{0.0, 0.5}, cplx{0.0, 0.5}};

  /// Resonant pumps with a common probe offset delta (rad/s) on every mode:
  /// signal delta/kappa_j + i/2, idler -delta/kappa_j + i/2.
  static DetuningVector resonant(const ModeSet& modes, double delta);

  /// Explicit per-sideband frequency offsets (rad/s), for off-resonant pumps.
  static DetuningVector from_offsets(const ModeSet& modes, const std::array<double, 3>& signal_offset,
                                     const std::array<double, 3>& idler_offset);

  /// True when -conj(idler_j) == signal_j for every mode.
  bool is_resonant(double tol = 1e-12) const;
};

struct CouplingMatrix {
  Matrix6c entries = Matrix6c::Zero();
};

struct ScatteringMatrix {
  Matrix6c entries = Matrix6c::Zero();

  cplx operator()(int out, int in) const { return entries(out, in); }
};

CouplingMatrix build_coupling_matrix(const PumpSet& pumps, const DetuningVector& detunings);

/// Reciprocal-condition threshold below which inversion is refused.
inline constexpr double kMinReciprocalCondition = 1e-12;

/// S = i H M^-1 H - 1 with H = diag(sqrt(eta)). Throws NearSingular when the
/// reciprocal condition estimate of M drops below kMinReciprocalCondition.
ScatteringMatrix scattering_matrix(const CouplingMatrix& m, const ModeSet& modes);

ScatteringMatrix simulate(const ModeSet& modes, const PumpSet& pumps,
                          const DetuningVector& detunings);

struct ClosedFormDiagnostics {
  cplx loop_determinant;    // C, idler-loop determinant
  cplx delta_b_eff;         // effective detuning of b^S
  cplx determinant;         // |M|
  cplx s_aa, s_cc;          // reflections
  cplx s_aI_aS, s_cI_cS;    // signal -> own idler
  cplx s_ac, s_ca;          // forward (c -> a) and reverse (a -> c)
  cplx s_aS_cI;             // idler of c into signal of a
};

/// Closed-form elements for resonant pumps. Requires detunings.is_resonant();
/// throws OutOfRegime otherwise and DegenerateLoop when |C| < 1e-14.
ClosedFormDiagnostics closed_form_scattering(const ModeSet& modes, const PumpSet& pumps,
                                             const DetuningVector& detunings);

/// Reduced matrix in basis (a^S, c^S, a^{I*}, c^{I*}) under the directionality
/// conditions at loop phase +pi/2. Throws PoleReached for r >= 1.
Matrix4c reduced_scattering_ac(double s, double r, double eta_a, double eta_c, double phi_bb);

/// s = 4|b_ab|^2 / (1 + 4|b_ab|^2)
double conversion_ratio(double beta_ab_mag);
/// r = 2|b_bb| / (1 + 4|b_ab|^2)
double amplification_ratio(double beta_ab_mag, double beta_bb_mag);

double power_db(cplx amplitude);
double power_db(double power);

struct GainSummary {
  double s = 0.0;
  double r = 0.0;
  double sqrt_gs = 0.0;
  double sqrt_gi = 0.0;
  double sqrt_gx = 0.0;
  double sqrt_gy = 0.0;
  double eta_prefactor = 1.0;  // sqrt(eta_a eta_c)
  std::optional<double> bandwidth_3db;  // rad/s, filled by sweeps

  double gs_db() const { return power_db(sqrt_gs * sqrt_gs); }
  double gi_db() const { return power_db(sqrt_gi * sqrt_gi); }
  double gx_db() const { return power_db(sqrt_gx * sqrt_gx); }
  double gy_db() const { return power_db(sqrt_gy * sqrt_gy); }
};

/// Gains from (s, r) including the sqrt(eta_a eta_c) prefactor. Throws
/// PoleReached for r >= 1.
GainSummary gains_from_ratios(double s, double r, double eta_a, double eta_c);

/// Throws AsymmetricConversion when |b_ab| and |b_bc| differ by more than 1e-9.
GainSummary gain_summary(const ModeSet& modes, const PumpSet& pumps);

struct SweepRow {
  double delta = 0.0;  // rad/s
  std::optional<ScatteringMatrix> s;  // empty when the point was NearSingular
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int forward_out = kSignalA;  // gain path, set by the loop-phase sign
  int forward_in = kSignalC;
  std::optional<double> bandwidth_3db;     // rad/s, full width of forward gain
  std::optional<double> return_loss_band;  // rad/s, both reflections below -threshold
};

/// Evaluates S over a strictly increasing grid of probe detunings (rad/s).
/// Singular points are kept as empty rows. Band edges are linearly
/// interpolated in dB; a band touching the grid edge is reported as empty.
SweepResult sweep_scattering(const ModeSet& modes, const PumpSet& pumps,
                             std::span<const double> delta_grid,
                             double return_loss_threshold_db = 10.0);

}  // namespace quadamp
