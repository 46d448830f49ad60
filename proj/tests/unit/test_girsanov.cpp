#include <gtest/gtest.h>

#include <cmath>

#include "mfchain/girsanov.hpp"
#include "mfchain/model.hpp"
#include "mfchain/two_state.hpp"
#include "oracles.hpp"

using namespace mfchain;

namespace {

constexpr double kAlpha = 0.7;
constexpr double kGab = 1.3;
constexpr double kGba = 0.9;

TwoStateSpec spec() {
  TwoStateSpec s;
  s.alpha = kAlpha;
  s.g_ab = kGab;
  s.g_ba = kGba;
  return s;
}

MeasureChange ex1_change(double u, std::size_t intervals = 64) {
  auto model = ex1_model(spec());
  TimeGrid grid(1.0, intervals);
  return make_measure_change(model, ControlTable::constant(grid, model.states(), u), std::nullopt);
}

MeasureChange identity_change(const GeneratorMatrix& g) {
  MeasureChange c;
  c.intensity = reference_intensity(g);
  c.reference = g;
  return c;
}

}  // namespace

TEST(LikelihoodRatio, RowValues) {
  auto change = ex1_change(2.0);
  LikelihoodRatioField ell(change.intensity, change.reference);
  std::vector<JumpEvent> none;
  PathPrefix at_a{0, none};
  PathPrefix at_b{1, none};
  EXPECT_NEAR(ell(0.1, at_a, 0.0, 2.0, 1), kAlpha / kGab - 1.0, 1e-15);
  EXPECT_NEAR(ell(0.1, at_b, 0.0, 2.0, 0), 2.0 / kGba - 1.0, 1e-15);
  EXPECT_EQ(ell(0.1, at_a, 0.0, 2.0, 0), 0.0);
}

TEST(LikelihoodRatio, UnsupportedTransitionThrows) {
  auto g = validate_generator({{-1, 1, 0}, {1, -2, 1}, {0, 1, -1}}, StateSpace({0, 1, 2}));
  IntensitySpec lambda;
  lambda.support = g.states();
  lambda.majorant = 10.0;
  lambda.evaluate = [](double, const PathPrefix&, double, double, std::span<double> row) {
    std::fill(row.begin(), row.end(), 1.0);
  };
  LikelihoodRatioField ell(lambda, g);
  std::vector<JumpEvent> none;
  std::vector<double> out(3);
  try {
    ell.row(0.0, PathPrefix{0, none}, 0.0, 0.0, out);
    FAIL() << "expected UnsupportedTransition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedTransition);
  }
}

TEST(Density, ReferenceIntensityGivesOne) {
  auto g = validate_generator({{-1, 1}, {2, -2}}, StateSpace({0, 1}));
  auto change = identity_change(g);
  JumpPath p(0, {{0.2, 1}, {0.5, 0}, {0.9, 1}}, 1.0);
  for (double v : density_product(p, change).values) EXPECT_EQ(v, 1.0);
}

TEST(Density, NoJumpClosedForm) {
  JumpPath p(0, {}, 1.0);
  auto d = density_product(p, ex1_change(1.5));
  EXPECT_NEAR(d.terminal(), std::exp(-(kAlpha - kGab)), 1e-12);
}

TEST(Density, OneJumpClosedForm) {
  const double s = 0.37;
  const double u = 1.5;
  JumpPath p(0, {{s, 1}}, 1.0);
  auto d = density_product(p, ex1_change(u));
  double expected = kAlpha / kGab * std::exp(-(kAlpha - kGab) * s - (u - kGba) * (1.0 - s));
  EXPECT_NEAR(d.terminal(), expected, 1e-12);
}

TEST(Density, LogTerminalMatchesProduct) {
  JumpPath p(0, {{0.1, 1}, {0.6, 0}}, 1.0);
  auto change = ex1_change(0.4);
  EXPECT_NEAR(log_density_terminal(p, change), std::log(density_product(p, change).terminal()), 1e-12);
}

TEST(Density, ExactJumpFactorInEuler) {
  const double s = 0.4567;
  JumpPath p(0, {{s, 1}}, 1.0);
  auto change = ex1_change(1.0);
  auto d = density_sde_euler(p, change, 1e-6);
  std::size_t at = 0;
  while (d.times[at] < s) ++at;
  ASSERT_DOUBLE_EQ(d.times[at], s);
  double drift = std::exp(-(kAlpha - kGab) * (s - d.times[at - 1]));
  EXPECT_NEAR(d.values[at] / (d.values[at - 1] * drift), kAlpha / kGab, 1e-8);
}

TEST(Density, EulerConvergesAtFirstOrder) {
  JumpPath p(0, {{0.23, 1}, {0.61, 0}}, 1.0);
  auto change = ex1_change(2.5);
  double exact = density_product(p, change).terminal();
  std::vector<double> steps{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> errors;
  for (double dt : steps) errors.push_back(std::abs(density_sde_euler(p, change, dt).terminal() - exact));
  double slope = oracle::log_log_slope(steps, errors);
  EXPECT_GT(slope, 0.8);
  EXPECT_LT(slope, 1.2);
}

TEST(Density, ZeroRateAtJumpIsFlagged) {
  JumpPath p(0, {{0.3, 1}, {0.7, 0}}, 1.0);
  auto d = density_product(p, ex1_change(0.0));
  EXPECT_TRUE(d.zero_rate_at_jump);
  EXPECT_DOUBLE_EQ(d.zero_rate_time, 0.7);
  EXPECT_EQ(d.terminal(), 0.0);
  EXPECT_EQ(log_density_terminal(p, ex1_change(0.0)), -std::numeric_limits<double>::infinity());
}

TEST(Density, PositiveOnEveryPathWithPositiveRates) {
  auto change = ex1_change(0.8);
  auto ens = simulate_reference(change.reference, InitialLaw::point_mass(0), 1.0, 500, 3, 0);
  for (const auto& p : ens.paths) {
    auto d = density_product(p, change);
    ASSERT_FALSE(d.zero_rate_at_jump);
    for (double v : d.values) ASSERT_GT(v, 0.0);
  }
}

TEST(Martingale, ReferenceIntensityHasZeroVariance) {
  auto g = validate_generator({{-1, 1}, {2, -2}}, StateSpace({0, 1}));
  auto report = martingale_checks(identity_change(g), InitialLaw::point_mass(0), 1.0, 2000, 5);
  EXPECT_EQ(report.mean_L, 1.0);
  EXPECT_EQ(report.se_L, 0.0);
  EXPECT_TRUE(report.pass_L);
}

TEST(Martingale, Ex1UnitControlPasses) {
  auto report = martingale_checks(ex1_change(1.0), InitialLaw::point_mass(0), 1.0, 50000, 77);
  EXPECT_TRUE(report.all_pass()) << report.mean_L << " +- " << report.se_L;
  EXPECT_EQ(report.per_edge.size(), 2u);
  EXPECT_EQ(report.n_paths, 50000u);
}

TEST(Martingale, EdgeListIsRespected) {
  auto report = martingale_checks(ex1_change(1.0), InitialLaw::point_mass(0), 1.0, 1000, 7, {{0, 1}});
  ASSERT_EQ(report.per_edge.size(), 1u);
  EXPECT_EQ(report.per_edge[0].i, 0);
  EXPECT_EQ(report.per_edge[0].j, 1);
}
