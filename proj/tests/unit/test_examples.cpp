#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfchain/riccati.hpp"
#include "mfchain/schlogl.hpp"
#include "mfchain/two_state.hpp"

using namespace mfchain;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mfchain::Error thrown";
  return ErrorKind::InvalidArgument;
}

PathPrefix at(State x) { return PathPrefix{x, {}}; }

std::optional<double> exit_time(State a, State b, double alpha, double m0) {
  return solve_constrained_riccati(ex2_riccati_coeffs(a, b, alpha, m0), 1e-4, 100.0, false).exit_time;
}

}  // namespace

TEST(TwoState, ReferenceGenerator) {
  TwoStateSpec s;
  s.g_ab = 2.0;
  s.g_ba = 0.5;
  auto g = two_state_reference(s);
  EXPECT_EQ(g.rate(0, 1), 2.0);
  EXPECT_EQ(g.rate(1, 0), 0.5);
}

TEST(TwoState, SpecValidation) {
  auto check = [](auto mutate) {
    TwoStateSpec s;
    mutate(s);
    return kind_of([&] { s.validate(); });
  };
  EXPECT_EQ(check([](TwoStateSpec& s) { s.a = 2; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(check([](TwoStateSpec& s) { s.alpha = 0.0; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(check([](TwoStateSpec& s) { s.g_ba = 0.0; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(check([](TwoStateSpec& s) { s.h_b = -1.0; }), ErrorKind::InvalidArgument);
}

TEST(TwoState, Ex1ClosedForms) {
  TwoStateSpec s;
  s.h_a = 0.25;
  s.h_b = 2.0;
  EXPECT_EQ(ex1_optimal_control(s, at(s.a), 0.3), 0.0);
  EXPECT_EQ(ex1_optimal_control(s, at(s.b), 0.3), 1.75);
  auto [q_ab, q_ba] = ex1_adjoint_closed_form(s);
  EXPECT_EQ(q_ab, -1.75);
  EXPECT_EQ(q_ba, 1.75);
}

TEST(TwoState, Ex1ModelRatesAndCosts) {
  TwoStateSpec s;
  s.alpha = 0.4;
  auto model = ex1_model(s);
  std::vector<double> row(2);
  model.rates(0.0, 0, 0.0, 3.0, row);
  EXPECT_EQ(row[1], 0.4);
  model.rates(0.0, 1, 0.0, 3.0, row);
  EXPECT_EQ(row[0], 3.0);
  EXPECT_EQ(model.running_cost(0.0, 1, 0.0, 3.0), 4.5);
  EXPECT_EQ(model.terminal_cost(s.b, 0.0), s.h_b);
  EXPECT_FALSE(model.mean_coupled());
}

TEST(TwoState, Ex2ClosedFormControl) {
  TwoStateSpec s;
  s.a = 1;
  s.b = 3;
  auto mu = MeanCurve::constant(TimeGrid(1.0, 4), 1.5);
  EXPECT_EQ(ex2_optimal_control(s, mu, at(s.a), 0.5), 0.0);
  EXPECT_EQ(ex2_optimal_control(s, mu, at(s.b), 0.5), (9.0 - 1.0) + 2.0 * 1.5 * (1.0 - 3.0));
}

TEST(TwoState, Ex2ModelIsMeanCoupled) {
  TwoStateSpec s;
  auto model = ex2_model(s);
  EXPECT_TRUE(model.mean_coupled());
  std::vector<double> row(2);
  model.rates(0.0, 1, 0.3, 0.2, row);
  EXPECT_NEAR(row[0], 0.5, 1e-15);
  EXPECT_NEAR(model.terminal_cost(s.b, 0.25), 0.75 * 0.75, 1e-15);
}

TEST(TwoState, Ex2ControlTableUsesLeftValues) {
  TwoStateSpec s;
  TimeGrid grid(1.0, 4);
  MeanCurve mu(grid, {0.0, 0.1, 0.2, 0.3, 0.4});
  auto table = ex2_control_table(s, mu);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(table.at(k, 1), 1.0 - 2.0 * mu.value(k), 1e-15);
    EXPECT_EQ(table.at(k, 0), 0.0);
  }
}

TEST(TwoState, Ex2ControlAdmissibleWhileMeanInBand) {
  for (double alpha : {0.3, 0.5, 1.0, 5.0}) {
    TwoStateSpec s;
    s.alpha = alpha;
    auto params = ex2_riccati_coeffs(s.a, s.b, alpha);
    TimeGrid grid(std::min(1.0, solve_constrained_riccati(params).exit_time.value_or(1.0)), 128);
    auto table = ex2_control_table(s, riccati_curve(params, grid));
    for (std::size_t k = 0; k < grid.intervals(); ++k)
      ASSERT_GE(table.at(k, 1), 0.0) << alpha << " t=" << grid.time(k);
  }
}

TEST(Riccati, Coefficients) {
  auto p = ex2_riccati_coeffs(0, 1, 0.3);
  EXPECT_EQ(p.A, 1.0);
  EXPECT_EQ(p.B, -1.0);
  EXPECT_EQ(p.C, 0.3);
  EXPECT_EQ(p.exit_level, 0.5);
  auto q = ex2_riccati_coeffs(1, 2, 0.5, 1.0);
  EXPECT_EQ(q.A, 1.0);
  EXPECT_EQ(q.B, 3.0 + 1.0 * (1.0 - 4.0) - 4.0);
  EXPECT_EQ(q.C, 0.5 * 2.0 + 1.0 * (4.0 - 1.0));
  EXPECT_EQ(q.m0, 1.0);
  EXPECT_EQ(q.exit_level, 1.5);
}

TEST(Riccati, TabulatedExitTimes) {
  EXPECT_NEAR(*exit_time(0, 1, 0.3, 0.0), 5.145, 0.01);
  EXPECT_FALSE(exit_time(0, 1, 0.1, 0.0).has_value());
  EXPECT_NEAR(*exit_time(1, 2, 0.5, 1.0), 1.001, 0.01);
  EXPECT_NEAR(*exit_time(2, 3, 0.5, 2.0), 0.761, 0.01);
}

TEST(Riccati, ArctanCaseIsQuarterPeriod) {
  auto p = ex2_riccati_coeffs(0, 1, 0.5);
  EXPECT_NEAR(*riccati_exit_time_closed_form(p), std::numbers::pi / 2.0, 1e-12);
  EXPECT_NEAR(*exit_time(0, 1, 0.5, 0.0), std::numbers::pi / 2.0, 1e-6);
}

TEST(Riccati, ClosedFormAgreesWithRk4) {
  for (double alpha : {0.3, 0.4, 0.7, 1.0, 5.0, 10.0})
    for (double m0 : {0.0, 0.25}) {
      auto p = ex2_riccati_coeffs(0, 1, alpha, m0);
      auto closed = riccati_exit_time_closed_form(p);
      auto numeric = solve_constrained_riccati(p).exit_time;
      ASSERT_EQ(closed.has_value(), numeric.has_value()) << alpha << " " << m0;
      if (closed) EXPECT_NEAR(*closed, *numeric, 1e-5) << alpha << " " << m0;
    }
}

TEST(Riccati, ExitTimeDecreasesWithAlpha) {
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {0.3, 0.4, 0.5, 0.7, 1.0, 2.0, 5.0, 10.0}) {
    double t = *exit_time(0, 1, alpha, 0.25);
    EXPECT_LT(t, previous) << alpha;
    previous = t;
  }
}

TEST(Riccati, TrajectoryStaysInBand) {
  auto p = ex2_riccati_coeffs(0, 1, 0.3);
  auto sol = solve_constrained_riccati(p, 1e-3);
  ASSERT_TRUE(sol.exit_time.has_value());
  for (double v : sol.values) {
    EXPECT_GE(v, p.lower_level);
    EXPECT_LE(v, p.exit_level);
  }
  EXPECT_LE(sol.times.back(), *sol.exit_time);
}

TEST(Riccati, ZeroQuadraticCoefficientThrows) {
  RiccatiParams p{0.0, -1.0, 0.5, 0.0, 1.0, 0.0};
  EXPECT_EQ(kind_of([&] { riccati_exit_time_closed_form(p); }), ErrorKind::ZeroQuadraticCoefficient);
}

TEST(Riccati, BlowUpReportsLastValidTime) {
  RiccatiParams p{1.0, 0.0, 1.0, 0.0, 1e300, -1e300};
  try {
    solve_constrained_riccati(p, 1e-3, 10.0);
    FAIL() << "expected NonFiniteState";
  } catch (const NonFiniteStateError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteState);
    EXPECT_NEAR(e.last_valid_time(), std::numbers::pi / 2.0, 0.01);
  }
}

TEST(Riccati, TableKeepsInputOrder) {
  std::vector<RiccatiCase> cases{{0, 1, 0.3, 0.0}, {0, 1, 0.1, 0.0}, {0, 1, 0.5, 0.0}};
  auto rows = riccati_table(cases, 1e-4, 100.0, 3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].params.alpha, 0.1);
  EXPECT_FALSE(rows[1].exit_time.has_value());
  EXPECT_NEAR(*rows[2].exit_time, std::numbers::pi / 2.0, 1e-6);
  EXPECT_TRUE(riccati_table({}).empty());
}

TEST(Schlogl, ReferenceGeneratorBands) {
  SchloglSpec s;
  s.n_max = 4;
  s.x0 = 2;
  s.birth = 2.0;
  s.reference_death = 0.7;
  auto g = schlogl_reference(s);
  EXPECT_EQ(g.rate(1, 2), 2.0);
  EXPECT_EQ(g.rate(1, 0), 0.7);
  EXPECT_EQ(g.rate(0, 1), 2.0);
  EXPECT_EQ(g.rate(4, 3), 0.7);
  EXPECT_EQ(g.rate(1, 3), 0.0);
}

TEST(Schlogl, ControlIsOneAwayFromZero) {
  EXPECT_EQ(ex3_schlogl_control(at(0), 0.1), 0.0);
  EXPECT_EQ(ex3_schlogl_control(at(1), 0.1), 1.0);
  EXPECT_EQ(ex3_schlogl_control(at(7), 0.1), 1.0);
}

TEST(Schlogl, DownRateAndCounters) {
  SchloglSpec s;
  s.n_max = 4;
  s.x0 = 2;
  s.beta = 0.5;
  SchloglCounters counters;
  auto intensity = ex3_intensity(s, counters);
  std::vector<double> row(5);
  intensity.evaluate(0.0, at(2), 2.0, 0.3, row);
  EXPECT_NEAR(row[1], 0.3 + 0.5 * 2.0, 1e-15);
  EXPECT_EQ(row[3], s.birth);
  intensity.evaluate(0.0, at(2), 0.0, -1.0, row);
  EXPECT_EQ(row[1], 0.0);
  EXPECT_EQ(counters.floor_hits->load(), 1);
  intensity.evaluate(0.0, at(4), 0.0, 1.0, row);
  EXPECT_EQ(counters.truncations->load(), 1);
}

TEST(Schlogl, SpecValidation) {
  SchloglSpec s;
  s.x0 = 50;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
  s = SchloglSpec{};
  s.beta = -1.0;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
  s = SchloglSpec{};
  s.base_rates = {{0.0}};
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
}
