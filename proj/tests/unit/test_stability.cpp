#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "quadamp/error.hpp"
#include "quadamp/stability.hpp"

using namespace qtest;

namespace {

// Factorization-regime draw: log-uniform kappas, beta_bb below 1.2x the pole.
struct RegimeDraw {
  ModeSet modes;
  double ab, bb, loop;
};

RegimeDraw regime_draw(Gen& g, bool quarter_turn) {
  RegimeDraw d{lossless(g.modes()), g.uniform(0.05, 2.0), 0.0, 0.0};
  d.bb = g.uniform(0.0, 1.2 * (0.5 + 2 * d.ab * d.ab));
  d.loop = quarter_turn ? g.sign() * kPi / 2 : g.phase();
  return d;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("Routh-Hurwitz array") {
  const std::vector<double> stable3{1, 6, 11, 6};      // (x+1)(x+2)(x+3)
  const std::vector<double> pos_unstable{1, 1, 1, 3};  // positive coefficients, b1 b2 < b3
  const std::vector<double> neg{1, -1, 2};
  const std::vector<double> sext{1, 21, 175, 735, 1624, 1764, 720};  // roots -1..-6
  CHECK(routh_hurwitz_stable(stable3));
  CHECK_FALSE(routh_hurwitz_stable(pos_unstable));
  CHECK_FALSE(routh_hurwitz_stable(neg));
  CHECK(routh_hurwitz_stable(sext));
  const std::vector<double> flipped{-1, -6, -11, -6};
  CHECK(routh_hurwitz_stable(flipped));
  const std::vector<double> marginal{1, 0, 1};  // roots +-i
  CHECK_FALSE(routh_hurwitz_stable(marginal));
}

TEST_CASE("factor coefficients") {
  SUBCASE("passive circulator is always stable") {
    Gen g(1);
    for (int k = 0; k < 100; ++k) {
      const StabilityReport r = routh_coefficients(g.modes(), g.uniform(0, 3), 0.0, kPi / 2);
      CHECK(r.coefficients_positive);
      CHECK(r.stable);
    }
  }
  SUBCASE("first condition at the measured linewidths") {
    const ModeSet m = measured_modes();
    CHECK(routh_coefficients(m, 1.0, 2.499, kPi / 2).stable);
    CHECK_FALSE(routh_coefficients(m, 1.0, 2.501, kPi / 2).stable);
    CHECK_FALSE(routh_coefficients(m, 1.0, 2.501, kPi / 2).coefficients_positive);
    const StabilityReport at = routh_coefficients(m, 1.0, 2.5, kPi / 2);
    CHECK(at.plus->b3 == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("conversion bound at the measured linewidths") {
    const ModeSet m = measured_modes();
    const double bound = (m[0].kappa + m[2].kappa) / (4 * m[1].kappa);
    CHECK(bound == doctest::Approx(128.0 / 60.0));
    // beyond it the second condition, not the pole, limits beta_bb
    const double ab = std::sqrt(1.2 * bound);
    const double second = 0.5 + (m[0].kappa + m[2].kappa) / (2 * m[1].kappa);
    CHECK(second < 0.5 + 2 * ab * ab);
    CHECK(routh_coefficients(m, ab, 0.5 * second, kPi / 2).stable);
    const StabilityReport past = routh_coefficients(m, ab, 1.001 * second, kPi / 2);
    CHECK_FALSE(past.stable);
    CHECK(past.plus->b3 > 0.0);  // the pole is still ahead
    CHECK(eigen_margin(m, PumpSet::canonical(ab, ab, 0.5, 1.001 * second, kPi / 2)) > 0.0);
  }
  SUBCASE("explicit values") {
    const ModeSet m = measured_modes();
    const double ka = m[0].kappa, kb = m[1].kappa, kc = m[2].kappa;
    const StabilityReport r = routh_coefficients(m, 0.7, 1.1, 0.4);
    CHECK(r.plus->b1 == doctest::Approx(kb / 2 * (1 - 2.2) + (ka + kc) / 2));
    CHECK(r.minus->b2 == doctest::Approx(kb * (ka + kc) / 4 * (4 * 0.49 + 1 + 2.2) + ka * kc / 2));
    CHECK(r.plus->b3 == doctest::Approx(ka * kb * kc / 4 * (4 * 0.49 + 1 - 2.2)));
    CHECK(r.b_phi == doctest::Approx(std::pow(ka * kb * kc, 2) * std::pow(0.49, 2) * std::pow(std::cos(0.4), 2)));
  }
  SUBCASE("b_phi is nonnegative and vanishes at quarter turns") {
    Gen g(2);
    for (int k = 0; k < 200; ++k) CHECK(routh_coefficients(g.modes(), g.uniform(0, 2), 1.0, g.phase()).b_phi >= 0.0);
    CHECK(routh_coefficients(measured_modes(), 1.0, 1.0, kPi / 2).b_phi == 0.0);
    CHECK(routh_coefficients(measured_modes(), 1.0, 1.0, -kPi / 2).b_phi == 0.0);
  }
  SUBCASE("regime check") {
    CHECK_NOTHROW(routh_coefficients(measured_modes(), measured_pumps()));
    try {
      routh_coefficients(measured_modes(), PumpSet::canonical(1.0, 1.0, 0.4, 1.0, kPi / 2));
      FAIL("expected OutOfRegime");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::OutOfRegime);
    }
    CHECK_THROWS_AS(routh_coefficients(measured_modes(), PumpSet::canonical(1.0, 0.8, 0.5, 1.0, 0)), Error);
  }
}

TEST_CASE("characteristic polynomial and roots") {
  SUBCASE("pumps off: damped modes, each twice") {
    const ModeSet m = measured_modes();
    const StabilityReport r = characteristic_roots(m, PumpSet{});
    REQUIRE(r.roots.size() == 6);
    // double roots only resolve to about the square root of the working precision
    for (int j = 0; j < 3; ++j) {
      int hits = 0;
      for (const cplx& z : r.roots) hits += std::abs(z + m[j].kappa / 2) < 1e-4 * m[j].kappa;
      CHECK(hits == 2);
    }
    CHECK(r.stable);
    CHECK(r.margin == doctest::Approx(-m[1].kappa / 2).epsilon(1e-4));
  }
  SUBCASE("reconstruction at fresh points") {
    Gen g(9);
    for (int k = 0; k < 50; ++k) {
      const ModeSet m = g.modes();
      const PumpSet p = g.any_pumps(2.0);
      const CharacteristicPolynomial poly = characteristic_polynomial(m, p);
      for (int t = 0; t < 20; ++t) {
        const cplx lam = std::polar(g.uniform(0.2, 1.5) * poly.scale, g.phase());
        const cplx want = characteristic_determinant(m, p, lam);
        CHECK(std::abs(poly(lam) - want) <= 1e-8 * std::abs(want));
      }
    }
  }
  SUBCASE("roots agree with the Langevin eigenvalues") {
    Gen g(10);
    for (int k = 0; k < 200; ++k) {
      const ModeSet m = g.modes();
      const PumpSet p = g.any_pumps(2.0);
      const StabilityReport r = characteristic_roots(m, p);
      const double scale = std::max({m[0].kappa, m[1].kappa, m[2].kappa});
      CHECK(std::abs(r.margin - eigen_margin(m, p)) <= 1e-6 * scale);
    }
  }
  SUBCASE("bad sample scale is reported") {
    const ModeSet m = measured_modes();
    auto kind = [&](double scale) {
      try {
        characteristic_roots(m, measured_pumps(), scale);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::NonPhysical;
    };
    CHECK(kind(1e-5 * m[0].kappa) == ErrorKind::InterpolationIllConditioned);
    CHECK(kind(-1.0) == ErrorKind::InterpolationIllConditioned);
    CHECK_NOTHROW(characteristic_roots(m, measured_pumps(), 3 * m[0].kappa));
  }
}

TEST_CASE("property: factorized verdict matches the roots at quarter turns") {
  Gen g(500);
  for (int k = 0; k < 1000; ++k) {
    const RegimeDraw d = regime_draw(g, true);
    const bool routh = routh_coefficients(d.modes, d.ab, d.bb, d.loop).stable;
    const bool roots = characteristic_roots(d.modes, PumpSet::canonical(d.ab, d.ab, 0.5, d.bb, d.loop)).stable;
    CHECK(routh == roots);
  }
}

TEST_CASE("property: sextic verdict matches the roots at any loop phase") {
  Gen g(501);
  for (int k = 0; k < 500; ++k) {
    const RegimeDraw d = regime_draw(g, false);
    const PumpSet p = PumpSet::canonical(d.ab, d.ab, 0.5, d.bb, d.loop);
    const double margin = eigen_margin(d.modes, p);
    const double scale = std::max({d.modes[0].kappa, d.modes[1].kappa, d.modes[2].kappa});
    if (std::abs(margin) < 1e-9 * scale) continue;  // on the boundary
    CHECK(routh_coefficients(d.modes, p).stable == (margin < 0));
  }
}

TEST_CASE("margin crosses zero at the gain pole") {
  const ModeSet m = lossless(measured_modes());
  for (double ab : {0.3, 0.7, 1.0, 1.4}) {
    const double pole = 0.5 * (1 + 4 * ab * ab);
    double lo = 0.5 * pole, hi = 1.5 * pole;
    REQUIRE(characteristic_roots(m, PumpSet::canonical(ab, ab, 0.5, lo, kPi / 2)).margin < 0);
    REQUIRE(characteristic_roots(m, PumpSet::canonical(ab, ab, 0.5, hi, kPi / 2)).margin > 0);
    while (hi - lo > 1e-9 * pole) {
      const double mid = 0.5 * (lo + hi);
      (characteristic_roots(m, PumpSet::canonical(ab, ab, 0.5, mid, kPi / 2)).margin < 0 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - pole) <= 1e-6 * pole);
  }
}

TEST_CASE("stability region") {
  const ModeSet m = measured_modes(0.9);
  std::vector<double> gains, phases;
  for (int k = 0; k <= 12; ++k) gains.push_back(-10.0 + 3.0 * k);
  for (int k = 0; k <= 24; ++k) phases.push_back(-kPi + k * kPi / 12);
  const StabilityRegion reg = stability_region(m, measured_pumps(), gains, phases);
  REQUIRE(reg.cells.size() == gains.size());

  // below the unpumped gain (about -4.5 dB here) there is no r
  for (int gi : {0, 1}) {
    CHECK(std::isnan(reg.r[gi]));
    for (CellState c : reg.cells[gi]) CHECK(c == CellState::unknown);
  }

  for (std::size_t gi = 2; gi < gains.size(); ++gi) {
    const double r = reg.r[gi];
    const GainSummary gs = gains_from_ratios(0.8, r, 0.99, 0.99);
    CHECK(gs.gs_db() == doctest::Approx(gains[gi]).epsilon(1e-9));
    for (std::size_t p = 0; p < phases.size(); ++p)
      CHECK(reg.cells[gi][p] == reg.cells[gi][phases.size() - 1 - p]);  // phi -> -phi
    CHECK(reg.cells[gi][6] == CellState::stable);   // -pi/2
    CHECK(reg.cells[gi][18] == CellState::stable);  // +pi/2
  }
}

TEST_CASE("performance bounds") {
  const PerformanceBounds b = performance_bounds(measured_modes());
  CHECK(b.max_eta == doctest::Approx(128.0 / 143.0));
  CHECK(b.min_n_add == doctest::Approx(15.0 / 256.0));
  CHECK(b.min_sqrt_gy == doctest::Approx(15.0 / 143.0));

  const ModeSet better = make_modes(mode(Mode::a, 6, 166, 1), mode(Mode::b, 8, 3, 1), mode(Mode::c, 10, 90, 1));
  const PerformanceBounds i = performance_bounds(better);
  CHECK(i.max_eta == doctest::Approx(0.988).epsilon(1e-3));
  CHECK(i.max_eta > 0.95);
  CHECK(i.min_n_add == doctest::Approx(0.00586).epsilon(1e-3));
  CHECK(b.min_n_add / i.min_n_add == doctest::Approx(10.0).epsilon(1e-12));

  const ModeSet tiny_b = make_modes(mode(Mode::a, 6, 83, 1), mode(Mode::b, 8, 1e-9, 1), mode(Mode::c, 10, 45, 1));
  CHECK(performance_bounds(tiny_b).max_eta == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(performance_bounds(tiny_b).min_n_add < 1e-10);
}

}  // TEST_SUITE
