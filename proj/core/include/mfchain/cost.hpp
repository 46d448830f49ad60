#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/meanfield.hpp"

namespace mfchain {

/// J(u) = E^u[ int_0^T f(t, x(t), E^u[kappa_f(x(t))], u(t)) dt + h(x(T), E^u[kappa_h(x(T))]) ]
/// Missing callables count as zero.
struct CostSpec {
  std::function<double(double t, State x, double mean_f, double control)> running;
  std::function<double(State x, double mean_h)> terminal;
  StateFunction kappa_f = identity_function();
  StateFunction kappa_h = identity_function();
};

enum class EstimatorKind { Direct, Reweighted };
const char* to_string(EstimatorKind kind) noexcept;

struct CostEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n_paths = 0;
  EstimatorKind estimator = EstimatorKind::Reweighted;
};

/// Paths under P weighted by L^u. The inner means E[L^u(t_k) kappa_f(x(t_k))]
/// and E[L^u(T) kappa_h(x(T))] are estimated on the same sample first; the
/// running mean is then read left-continuously off the grid.
CostEstimate estimate_cost_reweighted(const CostSpec& spec, const MeasureChange& change,
                                      const PathEnsemble& ensemble, unsigned threads = 0);
CostEstimate estimate_cost_reweighted(const CostSpec& spec, const MeasureChange& change, const InitialLaw& law,
                                      double horizon, std::size_t n, std::uint64_t seed, unsigned threads = 0);

/// Per-path values L(T)-weighted cost contributions (their mean is the
/// reweighted estimate). Used for common-random-number differences.
std::vector<double> reweighted_cost_samples(const CostSpec& spec, const MeasureChange& change,
                                            const PathEnsemble& ensemble, unsigned threads = 0);

/// Paths simulated under P^u with change.mean plugged into the intensity.
/// The same curve supplies E^u[kappa_f(x(t))] (left value) and
/// E^u[kappa_h(x(T))] (terminal value); without a curve both are 0.
/// change.reference is not used.
CostEstimate estimate_cost_direct(const CostSpec& spec, const MeasureChange& change, const InitialLaw& law,
                                  double horizon, std::size_t n, std::uint64_t seed, unsigned threads = 0);

struct Perturbation {
  std::string label;
  Control delta;
};

/// Eight step-function directions on the grid: shapes 1, t/T, 1 - t/T and
/// 4 (t/T)(1 - t/T), each with sign + and -, scaled by `magnitude` and by
/// weight(x(t^-)).
std::vector<Perturbation> canned_perturbations(const TimeGrid& grid, const StateFunction& weight,
                                               double magnitude = 0.1);

struct ProbeSetup {
  CostSpec cost;
  /// Base control and intensity; base.mean is used as-is unless `kappa` is
  /// set.
  MeasureChange base;
  ControlSet admissible;
  /// For mean-field problems: the mean curve is re-solved on the probe
  /// ensemble for the base and for every perturbed control, the latter
  /// starting from the base solution.
  std::optional<StateFunction> kappa;
  FixedPointConfig fixed_point{200, 1.0, 1e-9, 2, 0.0};
};

struct ProbeEntry {
  std::string label;
  double difference = 0.0;
  double se = 0.0;
  bool non_improving = true;
};

struct ProbeReport {
  std::vector<ProbeEntry> entries;
  double fraction_non_improving = 1.0;
  double base_value = 0.0;

  bool all_non_improving() const;
};

/// Common-random-number estimates of J(base + eps delta) - J(base) on one
/// ensemble under P. A direction counts as non-improving when the
/// difference is >= -3 SE. Throws InadmissiblePerturbation when the
/// perturbed control leaves `admissible` or makes a rate negative along the
/// ensemble.
ProbeReport perturbation_probe(const ProbeSetup& setup, const std::vector<Perturbation>& directions, double eps,
                               const PathEnsemble& ensemble, unsigned threads = 0);

}  // namespace mfchain
