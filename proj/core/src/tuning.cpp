#include "quadamp/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadamp/quadrature.hpp"
#include "quadamp/stability.hpp"

namespace quadamp {

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::pair<int, int> pair_modes(ConversionPair p) {
  switch (p) {
    case ConversionPair::ab: return {0, 1};
    case ConversionPair::bc: return {1, 2};
    case ConversionPair::ac: return {0, 2};
  }
  return {0, 2};
}

PumpSet single_pump(ConversionPair p, double mag) {
  PumpSet pumps;
  switch (p) {
    case ConversionPair::ab: pumps.beta_ab = mag; break;
    case ConversionPair::bc: pumps.beta_bc = mag; break;
    case ConversionPair::ac: pumps.beta_ac = mag; break;
  }
  return pumps;
}

double reflection_term(cplx s_jj, double eta, Calibration mode) {
  if (mode == Calibration::de_embedded && eta > 0.0) return std::norm((s_jj + 1.0) / eta - 1.0);
  return std::norm(s_jj);
}

bool amplifies_stably(const ModeSet& modes, const PumpSet& pumps) {
  try {
    if (!characteristic_roots(modes, pumps).stable) return false;
    simulate(modes, pumps, DetuningVector::resonant(modes, 0.0));
    return true;
  } catch (const Error&) {
    return false;
  }
}

PumpSet with_bb(const PumpSet& pumps, double ab, double r) {
  PumpSet out = pumps;
  out.beta_bb = std::polar(0.5 * r * (1.0 + 4.0 * ab * ab), -kPi / 2);
  return out;
}

template <typename F>
auto run_stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const TargetUnreachable& e) {
    throw TargetUnreachable(name + ": " + e.what(), e.ceiling_db());
  } catch (const Error& e) {
    throw Error(e.kind(), name + ": " + e.what());
  }
}

}  // namespace

void validate(const TuningTargets& t) {
  std::vector<std::string> bad;
  if (!std::isfinite(t.gx_db)) bad.push_back("targets.gx_db must be finite");
  if (!(t.s > 0.0 && t.s < 1.0)) bad.push_back("targets.s must lie in (0, 1)");
  if (t.loop_sign != 1 && t.loop_sign != -1) bad.push_back("targets.loop_sign must be +1 or -1");
  if (bad.empty()) return;
  std::string msg = "invalid tuning targets:";
  for (const auto& b : bad) msg += "\n  " + b;
  throw Error(ErrorKind::ValidationError, msg);
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol) {
  double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
  for (int k = 0; k <= 16; ++k) {
    const double v = f(lo + (hi - lo) * k / 16.0);
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
  }
  if (!(fmax - fmin > 1e-14 * (1.0 + std::abs(fmax))))
    throw Error(ErrorKind::NoMinimum, "objective is flat over the search bracket");

  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (b - a > tol) {
    ++it;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (a + b);
  return ScalarMinimum{x, f(x), it};
}

double calibrate_conversion(const ModeSet& modes, ConversionPair pair, Calibration mode) {
  validate(modes);
  const auto [j, k] = pair_modes(pair);
  const DetuningVector res = DetuningVector::resonant(modes, 0.0);
  auto objective = [&](double mag) {
    const ScatteringMatrix s = simulate(modes, single_pump(pair, mag), res);
    return reflection_term(s(j, j), modes[j].eta(), mode) +
           reflection_term(s(k, k), modes[k].eta(), mode);
  };
  return golden_section_minimize(objective, 0.0, 2.0, 1e-6).x;
}

StageReport stage_snapshot(std::string stage, const ModeSet& modes, const PumpSet& pumps,
                           int loop_sign) {
  StageReport rep;
  rep.stage = std::move(stage);
  rep.pumps = pumps;
  rep.snapshot = simulate(modes, pumps, DetuningVector::resonant(modes, 0.0));
  const int out = loop_sign >= 0 ? kSignalA : kSignalC;
  const int in = loop_sign >= 0 ? kSignalC : kSignalA;
  rep.forward_db = power_db(rep.snapshot(out, in));
  rep.reverse_db = power_db(rep.snapshot(in, out));
  rep.isolation_db = std::abs(rep.forward_db - rep.reverse_db);
  rep.reflection_a_db = power_db(rep.snapshot(kSignalA, kSignalA));
  rep.reflection_c_db = power_db(rep.snapshot(kSignalC, kSignalC));
  return rep;
}

StageReport set_circulation(const ModeSet& modes, const PumpSet& calibrated, int loop_sign,
                            double min_isolation_db) {
  if (loop_sign != 1 && loop_sign != -1)
    throw Error(ErrorKind::ValidationError, "loop sign must be +1 or -1");
  const double bb = std::abs(calibrated.beta_bb);
  const PumpSet pumps = PumpSet::canonical(
      std::abs(calibrated.beta_ab), std::abs(calibrated.beta_bc), std::abs(calibrated.beta_ac), bb,
      loop_sign * kPi / 2, bb > 0.0 ? calibrated.bb_phase() : -kPi / 2);
  StageReport rep = stage_snapshot("circulate", modes, pumps, loop_sign);
  if (!(rep.isolation_db >= min_isolation_db)) {
    throw Error(ErrorKind::IsolationNotReached,
                "isolation " + fmt(rep.isolation_db) + " dB below " + fmt(min_isolation_db) +
                    " dB; conversion magnitudes look miscalibrated");
  }
  return rep;
}

StageReport boost_b_coupling(const ModeSet& modes, const PumpSet& pumps, double target_s) {
  validate(modes);
  if (!(target_s > 0.0 && target_s < 1.0))
    throw Error(ErrorKind::ValidationError, "target s must lie in (0, 1)");
  const double mag = 0.5 * std::sqrt(target_s / (1.0 - target_s));
  const double bound = (modes[0].kappa + modes[2].kappa) / (4.0 * modes[1].kappa);
  if (mag * mag >= bound) {
    throw Error(ErrorKind::StabilityBoundViolated,
                "|beta_ab|^2 = " + fmt(mag * mag) + " reaches the bound (ka + kc)/(4 kb) = " +
                    fmt(bound));
  }
  PumpSet out = pumps;
  out.beta_ab = std::polar(mag, std::arg(pumps.beta_ab));
  out.beta_bc = std::polar(mag, std::arg(pumps.beta_bc));
  return stage_snapshot("boost", modes, out, pumps.loop_phase() >= 0.0 ? 1 : -1);
}

double amplification_ceiling_db(const ModeSet& modes, const PumpSet& pumps) {
  const double ab = std::abs(pumps.beta_ab);
  if (!amplifies_stably(modes, with_bb(pumps, ab, 0.0)))
    return -std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (amplifies_stably(modes, with_bb(pumps, ab, mid)) ? lo : hi) = mid;
  }
  return gains_from_ratios(conversion_ratio(ab), lo, modes[0].eta(), modes[2].eta()).gx_db();
}

TuningResult set_amplification(const ModeSet& modes, const PumpSet& pumps, double target_gx_db) {
  validate(modes);
  const double ab = std::abs(pumps.beta_ab);
  if (std::abs(ab - std::abs(pumps.beta_bc)) > 1e-9)
    throw Error(ErrorKind::AsymmetricConversion, "|beta_ab| and |beta_bc| differ");
  if (!std::isfinite(target_gx_db))
    throw Error(ErrorKind::ValidationError, "target gain must be finite");

  const double s = conversion_ratio(ab);
  const double eac = std::sqrt(modes[0].eta() * modes[2].eta());
  const double g = std::pow(10.0, target_gx_db / 20.0) / eac;
  double r = 1.0 - 2.0 * s / (g + 1.0);
  if (std::abs(r) < 1e-12) r = 0.0;

  if (!(r >= 0.0 && r < 1.0)) {
    const double ceiling = amplification_ceiling_db(modes, pumps);
    const std::string why = r < 0.0 ? "below the no-pump gain" : "beyond the gain pole";
    throw TargetUnreachable("target " + fmt(target_gx_db) + " dB is " + why +
                                "; stable range ends at " + fmt(ceiling) + " dB",
                            ceiling);
  }
  const PumpSet out = with_bb(pumps, ab, r);
  if (!amplifies_stably(modes, out)) {
    const double ceiling = amplification_ceiling_db(modes, pumps);
    throw TargetUnreachable("target " + fmt(target_gx_db) + " dB is unstable; ceiling " +
                                fmt(ceiling) + " dB",
                            ceiling);
  }

  const int sign = pumps.loop_phase() >= 0.0 ? 1 : -1;
  StageReport rep = stage_snapshot("amplify", modes, out, sign);
  const Mode in = sign > 0 ? Mode::c : Mode::a;
  const Mode to = sign > 0 ? Mode::a : Mode::c;
  rep.gx_db = power_db(transfer_block(quadrature_matrix(rep.snapshot), in, to).gain_max);

  TuningResult res;
  res.pumps = out;
  res.stages.push_back(std::move(rep));
  res.stable = true;
  return res;
}

TuningResult program_device(const ModeSet& modes, const TuningTargets& targets,
                            Calibration calibration) {
  validate(modes);
  validate(targets);
  TuningResult res;

  PumpSet calibrated = run_stage("stage 1 (calibrate)", [&] {
    PumpSet p;
    p.beta_ab = calibrate_conversion(modes, ConversionPair::ab, calibration);
    p.beta_bc = calibrate_conversion(modes, ConversionPair::bc, calibration);
    p.beta_ac = calibrate_conversion(modes, ConversionPair::ac, calibration);
    PumpSet ac_only;
    ac_only.beta_ac = p.beta_ac;
    StageReport rep = stage_snapshot("calibrate", modes, ac_only, targets.loop_sign);
    rep.pumps = p;
    res.stages.push_back(std::move(rep));
    return p;
  });

  const StageReport circ = run_stage("stage 2 (circulate)", [&] {
    return set_circulation(modes, calibrated, targets.loop_sign);
  });
  res.stages.push_back(circ);

  const StageReport boost = run_stage("stage 3 (boost)", [&] {
    return boost_b_coupling(modes, circ.pumps, targets.s);
  });
  res.stages.push_back(boost);

  TuningResult amp = run_stage("stage 4 (amplify)", [&] {
    return set_amplification(modes, boost.pumps, targets.gx_db);
  });
  res.pumps = amp.pumps;
  res.stable = amp.stable;
  for (auto& st : amp.stages) res.stages.push_back(std::move(st));
  return res;
}

}  // namespace quadamp
