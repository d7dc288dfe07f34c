#pragma once

// Four-stage programming of the amplifier against the simulated device:
// calibrate each conversion pump, close the loop for circulation, raise the
// a-b and b-c conversion past the loss of b, then add the amplification pump.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/error.hpp"

namespace quadamp {

struct TuningTargets {
  double gx_db = 0.0;
  double s = 0.8;
  int loop_sign = +1;

  bool operator==(const TuningTargets&) const = default;
};

void validate(const TuningTargets& t);

enum class ConversionPair { ab, bc, ac };

enum class Calibration {
  raw,          // minimise measured reflections |S_jj|^2 + |S_kk|^2
  de_embedded,  // same after removing the known port efficiencies
};

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search on [lo, hi]. Throws NoMinimum when the objective is
/// flat over the bracket.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol = 1e-6);

/// Magnitude of the single active conversion pump that best matches the pair.
double calibrate_conversion(const ModeSet& modes, ConversionPair pair,
                            Calibration mode = Calibration::raw);

struct StageReport {
  std::string stage;
  PumpSet pumps;
  ScatteringMatrix snapshot;  // on resonance
  double forward_db = 0.0;    // forward path of the final circulation direction
  double reverse_db = 0.0;
  // |forward - reverse|. The bare circulator passes a -> c and blocks the
  // amplifier's forward path c -> a, so the sign flips between stages.
  double isolation_db = 0.0;
  double reflection_a_db = 0.0;
  double reflection_c_db = 0.0;
  std::optional<double> gx_db;  // numeric quadrature gain, amplification stage
};

struct TuningResult {
  PumpSet pumps;
  std::vector<StageReport> stages;
  bool stable = false;
};

/// Snapshot of a pump set with the a/c path metrics for the given direction.
StageReport stage_snapshot(std::string stage, const ModeSet& modes, const PumpSet& pumps,
                           int loop_sign);

/// Sets loop phase sign * pi/2 on the calibrated magnitudes (beta_bb kept).
/// Throws IsolationNotReached below min_isolation_db.
StageReport set_circulation(const ModeSet& modes, const PumpSet& calibrated, int loop_sign,
                            double min_isolation_db = 15.0);

/// |beta_ab| = |beta_bc| = sqrt(s / (1 - s)) / 2, phases kept. Throws
/// StabilityBoundViolated when |beta_ab|^2 >= (ka + kc) / (4 kb).
StageReport boost_b_coupling(const ModeSet& modes, const PumpSet& pumps, double target_s);

/// Thrown by set_amplification; carries the largest stable G_X.
class TargetUnreachable : public Error {
 public:
  TargetUnreachable(const std::string& what, double ceiling_db)
      : Error(ErrorKind::TargetUnreachable, what), ceiling_db_(ceiling_db) {}
  double ceiling_db() const { return ceiling_db_; }

 private:
  double ceiling_db_;
};

/// Largest G_X (dB) the current conversion settings reach while stable.
double amplification_ceiling_db(const ModeSet& modes, const PumpSet& pumps);

/// r = 1 - 2s / (sqrt(G_X)/sqrt(eta_a eta_c) + 1), |beta_bb| = r (1 + 4|beta_ab|^2)/2
/// at phase -pi/2. Returns only stable results.
TuningResult set_amplification(const ModeSet& modes, const PumpSet& pumps, double target_gx_db);

/// Runs all four stages; stage errors are rethrown with the stage named.
TuningResult program_device(const ModeSet& modes, const TuningTargets& targets,
                            Calibration calibration = Calibration::de_embedded);

}  // namespace quadamp
