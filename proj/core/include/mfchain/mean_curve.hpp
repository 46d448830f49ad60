#pragma once

#include <span>
#include <string>
#include <vector>

#include "mfchain/types.hpp"

namespace mfchain {

/// Approximation of t -> E^u[kappa(x(t))] on a uniform grid.
///
/// Two readings are offered. left_value() is the predictable step function
/// used inside intensities (the value at t uses the grid point at or before
/// t^-). interpolate() is the piecewise-linear reading used by the backward
/// sweep, where the curve is treated as a smooth input.
class MeanCurve {
 public:
  MeanCurve() = default;
  MeanCurve(TimeGrid grid, std::vector<double> values, std::string kappa_tag = "identity");

  static MeanCurve constant(const TimeGrid& grid, double value, std::string kappa_tag = "identity");

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double value(std::size_t k) const { return values_[k]; }
  double terminal() const { return values_.back(); }
  const std::string& kappa_tag() const noexcept { return kappa_tag_; }

  /// values[k] for t in (t_k, t_{k+1}]; values[0] for t <= 0.
  double left_value(double t) const noexcept { return values_[grid_.left_cell(t)]; }
  double interpolate(double t) const noexcept;

  /// sup_k |a_k - b_k|; grids must match.
  friend double sup_distance(const MeanCurve& a, const MeanCurve& b);

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  std::string kappa_tag_ = "identity";
};

/// Marginal law t -> (E[L(t) 1{x(t)=i}])_i on a uniform grid, i.e. the
/// occupation probabilities under the controlled measure. Rows are grid
/// points, columns state indices.
class MarginalCurve {
 public:
  MarginalCurve() = default;
  MarginalCurve(TimeGrid grid, std::size_t n_states, std::vector<double> probabilities);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t states() const noexcept { return n_states_; }
  std::span<const double> at(std::size_t k) const { return {probs_.data() + k * n_states_, n_states_}; }
  /// Piecewise-linear interpolation in time into `out` (size = states()).
  void interpolate(double t, std::span<double> out) const;

  /// Curve of sum_i p_i(t) kappa(state_i).
  MeanCurve expectation(const StateSpace& space, const StateFunction& kappa, std::string tag) const;

 private:
  TimeGrid grid_;
  std::size_t n_states_ = 0;
  std::vector<double> probs_;
};

}  // namespace mfchain
