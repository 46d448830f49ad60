#pragma once

#include <cstdint>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/mean_curve.hpp"

namespace mfchain {

struct FixedPointConfig {
  std::size_t max_iters = 50;
  double damping = 0.5;
  double tol = 0.02;
  std::size_t n_paths = 100000;
  /// Multiple of the largest pointwise SE added to tol in the stopping rule.
  double se_multiplier = 3.0;

  /// Throws InvalidArgument unless tol > 0 and 0 < damping <= 1;
  /// InsufficientPaths when n_paths < 2.
  void validate() const;
};

struct MeanEstimate {
  MeanCurve curve;
  /// Pointwise standard errors, one per grid point.
  std::vector<double> standard_error;

  double max_se() const;
};

/// One reweighting pass: value at t_k is the sample mean of
/// L^u(t_k) kappa(x(t_k)) over paths simulated under P, with change.mean
/// plugged into the intensity. Values are clamped to [min kappa, max kappa]
/// over the support.
MeanEstimate estimate_mean_curve(const MeasureChange& change, const StateFunction& kappa,
                                 const PathEnsemble& ensemble, const std::string& kappa_tag = "identity",
                                 unsigned threads = 0);
MeanEstimate estimate_mean_curve(const MeasureChange& change, const StateFunction& kappa, const InitialLaw& law,
                                 double horizon, std::size_t n, std::uint64_t seed,
                                 const std::string& kappa_tag = "identity", unsigned threads = 0);

/// Occupation probabilities E[L^u(t_k) 1{x(t_k) = i}].
MarginalCurve estimate_marginals(const MeasureChange& change, const PathEnsemble& ensemble, unsigned threads = 0);

struct FixedPointResult {
  MeanCurve curve;
  /// Number of damped updates applied before the curve was certified.
  std::size_t iterations = 0;
  /// sup_k |estimate(curve) - curve|
  double residual = 0.0;
  double max_se = 0.0;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, FixedPointResult best)
      : Error(ErrorKind::NoConvergence, what), best_(std::move(best)) {}
  const FixedPointResult& best() const noexcept { return best_; }

 private:
  FixedPointResult best_;
};

/// Damped Picard iteration mu <- (1 - theta) mu + theta estimate(mu) on one
/// fixed ensemble. A curve is accepted once
/// sup |estimate(mu) - mu| <= tol + se_multiplier * max SE. The starting curve is
/// change.mean when set, else the constant E_xi[kappa(x0)].
/// Throws NoConvergenceError (carrying the best iterate) after max_iters.
FixedPointResult solve_mean_fixed_point(const MeasureChange& change, const StateFunction& kappa,
                                        const PathEnsemble& ensemble, const FixedPointConfig& cfg,
                                        const std::string& kappa_tag = "identity", unsigned threads = 0);
FixedPointResult solve_mean_fixed_point(const MeasureChange& change, const StateFunction& kappa,
                                        const InitialLaw& law, double horizon, const FixedPointConfig& cfg,
                                        std::uint64_t seed, const std::string& kappa_tag = "identity",
                                        unsigned threads = 0);

}  // namespace mfchain
