#include <doctest.h>

#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "quadamp/error.hpp"
#include "quadamp/tuning.hpp"

using namespace qtest;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::NonPhysical;
}

// Two resonant modes joined by a single conversion pump reflect
// 2 eta / (1 + 4 beta^2) - 1 each; scan beta on a fine grid.
double grid_calibration(double eta_j, double eta_k) {
  double best = 0.0, best_val = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    const double beta = i * 1e-3;
    const double x = 2.0 / (1.0 + 4.0 * beta * beta);
    const double v = std::pow(eta_j * x - 1.0, 2) + std::pow(eta_k * x - 1.0, 2);
    if (v < best_val) best_val = v, best = beta;
  }
  return best;
}

PumpSet boosted(double loop_sign = 1) { return PumpSet::canonical(1.0, 1.0, 0.5, 0.0, loop_sign * kPi / 2); }

}  // namespace

TEST_SUITE("tuning") {

TEST_CASE("golden section search") {
  const ScalarMinimum m = golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3) + 2; }, -1, 2);
  CHECK(m.x == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.value == doctest::Approx(2.0));
  CHECK(m.iterations > 10);
  const ScalarMinimum edge = golden_section_minimize([](double x) { return x; }, 0, 1);
  CHECK(edge.x < 1e-5);
  CHECK(kind_of([] { golden_section_minimize([](double) { return 4.0; }, 0, 1); }) == ErrorKind::NoMinimum);
}

TEST_CASE("conversion calibration") {
  SUBCASE("lossless ports land on one half") {
    const ModeSet m = lossless(measured_modes());
    for (ConversionPair p : {ConversionPair::ab, ConversionPair::bc, ConversionPair::ac})
      CHECK(calibrate_conversion(m, p) == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("port loss shifts the raw optimum") {
    const ModeSet m = measured_modes(1.0, 0.99, 0.9);
    const double raw = calibrate_conversion(m, ConversionPair::ac, Calibration::raw);
    CHECK(raw == doctest::Approx(grid_calibration(0.99, 0.9)).epsilon(2e-3));
    CHECK(raw < 0.49);
    CHECK(calibrate_conversion(m, ConversionPair::ac, Calibration::de_embedded) ==
          doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("measured efficiencies") {
    const ModeSet m = measured_modes();
    CHECK(calibrate_conversion(m, ConversionPair::ac) == doctest::Approx(grid_calibration(0.99, 0.99)).epsilon(2e-3));
    CHECK(calibrate_conversion(m, ConversionPair::ac) == doctest::Approx(0.495).epsilon(1e-3));
  }
  SUBCASE("uncoupled ports give no minimum") {
    const ModeSet dark = measured_modes(1.0, 0.0, 0.0);
    CHECK(kind_of([&] { calibrate_conversion(dark, ConversionPair::ac); }) == ErrorKind::NoMinimum);
  }
}

TEST_CASE("circulation") {
  const ModeSet m = lossless(measured_modes());
  const PumpSet cal = PumpSet::canonical(0.5, 0.5, 0.5, 0.0, 0.0);

  SUBCASE("ideal circulator") {
    const StageReport plus = set_circulation(m, cal, +1);
    CHECK(plus.isolation_db > 60.0);
    CHECK(plus.reverse_db == doctest::Approx(0.0).epsilon(1e-9));  // a -> c passes
    CHECK(plus.pumps.loop_phase() == doctest::Approx(kPi / 2));
    const StageReport minus = set_circulation(m, cal, -1);
    CHECK(minus.pumps.loop_phase() == doctest::Approx(-kPi / 2));
    // the blocked direction swaps with the loop sign
    CHECK(std::abs(plus.snapshot(kSignalA, kSignalC)) < 1e-9);
    CHECK(std::abs(minus.snapshot(kSignalC, kSignalA)) < 1e-9);
    CHECK(std::abs(minus.snapshot(kSignalA, kSignalC)) == doctest::Approx(1.0));
  }
  SUBCASE("miscalibrated magnitudes are caught") {
    const PumpSet off = PumpSet::canonical(0.3, 0.3, 0.3, 0.0, 0.0);
    CHECK(kind_of([&] { set_circulation(m, off, +1); }) == ErrorKind::IsolationNotReached);
    CHECK(kind_of([&] { set_circulation(m, cal, 0); }) == ErrorKind::ValidationError);
  }
  SUBCASE("raw calibration on the measured device") {
    const ModeSet pm = measured_modes(0.9);
    const double ab = calibrate_conversion(pm, ConversionPair::ab);
    const double bc = calibrate_conversion(pm, ConversionPair::bc);
    const double ac = calibrate_conversion(pm, ConversionPair::ac);
    const StageReport rep = set_circulation(pm, PumpSet::canonical(ab, bc, ac, 0, 0), +1);
    CHECK(rep.isolation_db >= 15.0);
    CHECK(rep.isolation_db <= 40.0);
  }
}

TEST_CASE("boosting the b coupling") {
  const ModeSet m = measured_modes();
  const PumpSet circ = PumpSet::canonical(0.5, 0.5, 0.5, 0.0, kPi / 2);
  const StageReport r8 = boost_b_coupling(m, circ, 0.8);
  CHECK(std::abs(r8.pumps.beta_ab) == doctest::Approx(1.0));
  CHECK(std::abs(r8.pumps.beta_bc) == doctest::Approx(1.0));
  CHECK(r8.pumps.loop_phase() == doctest::Approx(kPi / 2));
  CHECK(std::abs(r8.isolation_db - 3.0) <= 1.5);
  CHECK(std::abs(boost_b_coupling(m, circ, 0.5).pumps.beta_ab) == doctest::Approx(0.5));
  CHECK(kind_of([&] { boost_b_coupling(m, circ, 0.95); }) == ErrorKind::StabilityBoundViolated);
  CHECK(kind_of([&] { boost_b_coupling(m, circ, 1.0); }) == ErrorKind::ValidationError);
}

TEST_CASE("amplification stage") {
  const ModeSet m = measured_modes();
  SUBCASE("target from the gain formula") {
    const double target = gains_from_ratios(0.8, 0.91, 0.99, 0.99).gx_db();
    const TuningResult res = set_amplification(m, boosted(), target);
    CHECK(std::abs(res.pumps.beta_bb) == doctest::Approx(2.275).epsilon(1e-9));
    CHECK(amplification_ratio(1.0, std::abs(res.pumps.beta_bb)) == doctest::Approx(0.91).epsilon(1e-9));
    CHECK(res.pumps.bb_phase() == doctest::Approx(-kPi / 2));
    REQUIRE(res.stages.size() == 1);
    REQUIRE(res.stages[0].gx_db);
    CHECK(*res.stages[0].gx_db == doctest::Approx(target).epsilon(1e-3));
    CHECK(res.stable);
  }
  SUBCASE("the unpumped gain needs no amplification pump") {
    const double floor_db = gains_from_ratios(0.8, 0.0, 0.99, 0.99).gx_db();
    const TuningResult res = set_amplification(m, boosted(), floor_db);
    CHECK(std::abs(res.pumps.beta_bb) < 1e-9);
  }
  SUBCASE("unreachable targets report the ceiling") {
    for (double target : {400.0, -20.0}) {
      try {
        set_amplification(m, boosted(), target);
        FAIL("expected TargetUnreachable");
      } catch (const TargetUnreachable& e) {
        CHECK(e.kind() == ErrorKind::TargetUnreachable);
        CHECK(e.ceiling_db() > 60.0);
        CHECK(std::isfinite(e.ceiling_db()));
      }
    }
  }
  SUBCASE("asymmetric conversion is refused") {
    CHECK(kind_of([&] { set_amplification(m, PumpSet::canonical(1.0, 0.9, 0.5, 0, kPi / 2), 20.0); }) ==
          ErrorKind::AsymmetricConversion);
  }
}

TEST_CASE("full programming sequence") {
  const ModeSet m = measured_modes(0.9);
  const TuningResult res = program_device(m, TuningTargets{24.0, 0.8, +1});
  REQUIRE(res.stages.size() == 4);
  CHECK(res.stages[0].stage == "calibrate");
  CHECK(res.stages[3].stage == "amplify");
  REQUIRE(res.stages[3].gx_db);
  CHECK(std::abs(*res.stages[3].gx_db - 24.0) <= 0.1);
  CHECK(std::abs(res.stages[3].reverse_db) <= 0.5);
  CHECK(res.stable);
  CHECK(eigen_margin(m, res.pumps) < 0.0);

  SUBCASE("repeatable") {
    const TuningResult again = program_device(m, TuningTargets{24.0, 0.8, +1});
    CHECK(again.pumps == res.pumps);
  }
  SUBCASE("reversed loop amplifies a -> c") {
    const TuningResult rev = program_device(m, TuningTargets{24.0, 0.8, -1});
    CHECK(rev.pumps.loop_phase() == doctest::Approx(-kPi / 2));
    REQUIRE(rev.stages[3].gx_db);
    CHECK(std::abs(*rev.stages[3].gx_db - 24.0) <= 0.1);
    CHECK(rev.stages[3].forward_db == doctest::Approx(res.stages[3].forward_db).epsilon(1e-6));
  }
  SUBCASE("stage errors name the stage") {
    try {
      program_device(m, TuningTargets{24.0, 0.95, +1});
      FAIL("expected StabilityBoundViolated");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::StabilityBoundViolated);
      CHECK(std::string(e.what()).find("stage 3") != std::string::npos);
    }
    CHECK(kind_of([&] { program_device(m, TuningTargets{24.0, 1.5, +1}); }) == ErrorKind::ValidationError);
  }
  SUBCASE("raw calibration stays within a decibel") {
    const TuningResult raw = program_device(m, TuningTargets{24.0, 0.8, +1}, Calibration::raw);
    REQUIRE(raw.stages[3].gx_db);
    CHECK(std::abs(*raw.stages[3].gx_db - 24.0) <= 1.0);
  }
}

}  // TEST_SUITE
