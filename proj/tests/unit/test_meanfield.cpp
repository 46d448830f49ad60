#include <gtest/gtest.h>

#include <cmath>

#include "mfchain/meanfield.hpp"
#include "mfchain/model.hpp"
#include "mfchain/riccati.hpp"
#include "mfchain/two_state.hpp"
#include "oracles.hpp"

using namespace mfchain;

namespace {

const TimeGrid kGrid(1.0, 32);

TwoStateSpec ex2_spec() {
  TwoStateSpec s;
  s.alpha = 0.3;
  return s;
}

struct Ex2Fixture {
  TwoStateSpec spec = ex2_spec();
  ControlledChain model = ex2_model(spec);
  ControlTable table = ex2_control_table(spec, riccati_curve(ex2_riccati_coeffs(spec.a, spec.b, spec.alpha), kGrid));
  MeasureChange change = make_measure_change(model, table, MeanCurve::constant(kGrid, 0.0));
  PathEnsemble ensemble = simulate_reference(model.reference, InitialLaw::point_mass(0), 1.0, 20000, 21, 0);
};

MeasureChange ex1_change(double u) {
  auto model = ex1_model(TwoStateSpec{});
  return make_measure_change(model, ControlTable::constant(kGrid, model.states(), u), std::nullopt);
}

}  // namespace

TEST(MeanCurveEstimate, ConstantKappaIsExact) {
  auto change = ex1_change(1.4);
  auto est = estimate_mean_curve(change, constant_function(1.0), InitialLaw::point_mass(0), 1.0, 2000, 1, "one");
  for (double v : est.curve.values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(est.curve.kappa_tag(), "one");
}

TEST(MeanCurveEstimate, ValuesStayInKappaRange) {
  auto change = ex1_change(3.0);
  auto est = estimate_mean_curve(change, identity_function(), InitialLaw::point_mass(0), 1.0, 200, 2);
  for (double v : est.curve.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(MeanCurveEstimate, MeanFreeMatchesMatrixExponential) {
  TwoStateSpec s;
  const double u = 1.0;
  auto est = estimate_mean_curve(ex1_change(u), identity_function(), InitialLaw::point_mass(0), 1.0, 40000, 3);
  for (std::size_t k : {4u, 16u, 32u}) {
    double t = kGrid.time(k);
    double exact = oracle::expm({{-s.alpha, s.alpha}, {u, -u}}, t)[0][1];
    EXPECT_LE(std::abs(est.curve.value(k) - exact), 3.0 * est.standard_error[k] + 1e-12) << "t=" << t;
  }
}

TEST(Marginals, RowsSumToOneUnderReference) {
  auto g = two_state_reference(TwoStateSpec{});
  MeasureChange change;
  change.intensity = reference_intensity(g);
  change.reference = g;
  change.grid = kGrid;
  auto ens = simulate_reference(g, InitialLaw::point_mass(0), 1.0, 1000, 4, 0);
  auto m = estimate_marginals(change, ens);
  for (std::size_t k = 0; k <= kGrid.intervals(); ++k) {
    auto row = m.at(k);
    EXPECT_NEAR(row[0] + row[1], 1.0, 1e-12);
  }
}

TEST(FixedPoint, FullStepOnMeanFreeModelNeedsOneUpdate) {
  auto change = ex1_change(1.0);
  auto ens = simulate_reference(change.reference, InitialLaw::point_mass(0), 1.0, 5000, 5, 0);
  FixedPointConfig cfg{50, 1.0, 1e-9, 5000, 0.0};
  auto r = solve_mean_fixed_point(change, identity_function(), ens, cfg);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(FixedPoint, Ex2MatchesForwardKolmogorov) {
  Ex2Fixture fx;
  FixedPointConfig cfg{100, 0.5, 1e-3, 20000, 0.0};
  auto r = solve_mean_fixed_point(fx.change, identity_function(), fx.ensemble, cfg);
  const double alpha = fx.spec.alpha;
  const auto& table = fx.table;
  auto law = oracle::forward_kolmogorov(
      [&](double t, const oracle::Vector& p) {
        double back = table(std::min(t, 1.0 - 1e-12), 1) + p[1];
        return oracle::Matrix{{-alpha, alpha}, {back, -back}};
      },
      {1.0, 0.0}, 1.0, 32 * 64);
  for (std::size_t k = 0; k <= kGrid.intervals(); ++k)
    EXPECT_NEAR(r.curve.value(k), law[k * 64][1], 0.02) << "t=" << kGrid.time(k);
}

TEST(FixedPoint, DampingDoesNotChangeTheLimit) {
  Ex2Fixture fx;
  auto full = solve_mean_fixed_point(fx.change, identity_function(), fx.ensemble, FixedPointConfig{100, 1.0, 1e-6, 20000, 0.0});
  auto half = solve_mean_fixed_point(fx.change, identity_function(), fx.ensemble, FixedPointConfig{100, 0.5, 1e-6, 20000, 0.0});
  EXPECT_LE(sup_distance(full.curve, half.curve), 1e-5);
  EXPECT_LE(full.iterations, half.iterations);
}

TEST(FixedPoint, NoConvergenceCarriesBestIterate) {
  Ex2Fixture fx;
  FixedPointConfig cfg{1, 0.5, 1e-12, 20000, 0.0};
  try {
    solve_mean_fixed_point(fx.change, identity_function(), fx.ensemble, cfg);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    EXPECT_EQ(e.best().curve.values().size(), kGrid.intervals() + 1);
    EXPECT_GT(e.best().residual, 0.0);
  }
}

TEST(FixedPointConfig, RejectsBadSettings) {
  for (auto cfg : {FixedPointConfig{10, 0.5, 0.0, 100, 3.0}, FixedPointConfig{10, 0.0, 0.1, 100, 3.0},
                   FixedPointConfig{10, 1.5, 0.1, 100, 3.0}, FixedPointConfig{0, 0.5, 0.1, 100, 3.0}}) {
    try {
      cfg.validate();
      ADD_FAILURE() << "accepted tol=" << cfg.tol << " damping=" << cfg.damping << " n=" << cfg.n_paths;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
  }
  try {
    FixedPointConfig{10, 0.5, 0.1, 1, 3.0}.validate();
    ADD_FAILURE() << "accepted a single path";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPaths);
  }
  EXPECT_NO_THROW(FixedPointConfig{}.validate());
}
