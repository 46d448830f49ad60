#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mfchain/mean_curve.hpp"
#include "mfchain/types.hpp"

namespace mfchain {

/// Validated Q-matrix on a finite state list, stored dense and row-major
/// by state index.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;

  const StateSpace& states() const noexcept { return states_; }
  std::size_t size() const noexcept { return states_.size(); }
  double rate(std::size_t i, std::size_t j) const { return rates_[i * size() + j]; }
  std::span<const double> row(std::size_t i) const { return {rates_.data() + i * size(), size()}; }
  /// -g_ii
  double exit_rate(std::size_t i) const { return -rate(i, i); }
  double max_exit_rate() const;

  /// (Gf)(i) = sum_j g_ij (f(j) - f(i))
  double apply(std::size_t i, const StateFunction& f) const;

 private:
  friend GeneratorMatrix validate_generator(const std::vector<std::vector<double>>&, const StateSpace&);
  StateSpace states_;
  std::vector<double> rates_;
};

/// Rejects negative off-diagonal rates (NegativeRate) and rows whose sum is
/// off by more than 1e-9 (RowSumViolation); accepted rows get the diagonal
/// recomputed so that the row sums to zero exactly.
GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates, const StateSpace& states);

struct JumpEvent {
  double time = 0.0;
  State to = 0;
  bool operator==(const JumpEvent&) const = default;
};

/// Right-continuous piecewise-constant trajectory on [0, T].
class JumpPath {
 public:
  JumpPath() = default;
  /// Throws InvalidPath unless event times are strictly increasing in (0, T]
  /// and every event changes the state.
  JumpPath(State x0, std::vector<JumpEvent> events, double horizon);

  State initial() const noexcept { return x0_; }
  const std::vector<JumpEvent>& events() const noexcept { return events_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t jumps() const noexcept { return events_.size(); }

  /// x(t)
  State state_at(double t) const;
  /// x(t^-); equals x0 at t <= 0.
  State state_before(double t) const;
  State terminal() const noexcept { return events_.empty() ? x0_ : events_.back().to; }

  bool operator==(const JumpPath&) const = default;

 private:
  State x0_ = 0;
  std::vector<JumpEvent> events_;
  double horizon_ = 0.0;
};

/// The part of a path strictly before the query time: x0 plus the events
/// that already happened. This is all an intensity or a feedback control may
/// read, which makes them predictable.
struct PathPrefix {
  State x0 = 0;
  std::span<const JumpEvent> history;

  State current() const noexcept { return history.empty() ? x0 : history.back().to; }
};

/// Control signal u(t) as a function of time and the observed prefix.
using Control = std::function<double(double t, const PathPrefix& prefix)>;

inline Control constant_control(double value) {
  return [value](double, const PathPrefix&) { return value; };
}

/// Row of jump rates lambda_ij(t, x, m, u) out of the current state of the
/// prefix. `row` has one entry per support state; the entry of the current
/// state is ignored.
using RateFunction =
    std::function<void(double t, const PathPrefix& prefix, double mean, double control, std::span<double> row)>;

struct IntensitySpec {
  StateSpace support;
  RateFunction evaluate;
  /// Bound on every total exit rate the simulation will meet.
  double majorant = 0.0;
  /// True when rates are constant in t whenever control and mean are; the
  /// density exponent is then integrated exactly segment by segment.
  bool piecewise_constant = true;
};

/// Reference intensity lambda = G (no control, no mean).
IntensitySpec reference_intensity(const GeneratorMatrix& g);

/// Rates at time t with validation: throws InvalidRate on negative or
/// non-finite off-diagonal entries.
void evaluate_rates(const IntensitySpec& intensity, double t, const PathPrefix& prefix, double mean,
                    double control, std::span<double> row);

/// Initial law xi: point mass or categorical.
struct InitialLaw {
  std::vector<State> states;
  std::vector<double> weights;

  static InitialLaw point_mass(State x0) { return {{x0}, {1.0}}; }
  State sample(double uniform) const;
  void validate(const StateSpace& space) const;
};

/// Exact-law sample by thinning against intensity.majorant. The mean value
/// fed to the intensity is mean->left_value(t) (0 without a curve).
/// Throws MajorantViolation if a realized total exit rate exceeds the
/// majorant.
JumpPath simulate_path(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control, State x0,
                       double horizon, std::uint64_t seed);
JumpPath simulate_path(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control,
                       const InitialLaw& law, double horizon, std::uint64_t seed);

/// Batch of paths; path k uses stream_seed(master_seed, k).
struct PathEnsemble {
  std::vector<JumpPath> paths;
  double horizon = 0.0;
  std::uint64_t master_seed = 0;

  std::size_t size() const noexcept { return paths.size(); }
};

PathEnsemble simulate_paths(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control,
                            const InitialLaw& law, double horizon, std::size_t n, std::uint64_t master_seed,
                            unsigned threads);

/// Ensemble under the reference measure P (intensity G, no control).
PathEnsemble simulate_reference(const GeneratorMatrix& g, const InitialLaw& law, double horizon, std::size_t n,
                                std::uint64_t master_seed, unsigned threads);

struct PathStatistics {
  std::map<std::pair<State, State>, long> counts;
  std::map<State, double> occupation;
  /// x(T) - x(0) - sum_{i != j} (j - i) N_ij(T)
  long representation_residual = 0;
};

PathStatistics path_statistics(const JumpPath& path);

/// M^f_T = f(x(T)) - f(x(0)) - int_0^T (Gf)(x(s)) ds, exact on the path.
double dynkin_residual(const JumpPath& path, const GeneratorMatrix& g, const StateFunction& f);

struct QuadraticVariation {
  /// [M](T): number of jumps.
  double optional = 0.0;
  /// <M>(T) = sum_{i != j} int I_i(s) g_ij ds
  double predictable = 0.0;
};

QuadraticVariation optional_variation(const JumpPath& path, const GeneratorMatrix& g);

}  // namespace mfchain
