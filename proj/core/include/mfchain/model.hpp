#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/cost.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/mean_curve.hpp"

namespace mfchain {

/// Feedback control u(t, x(t^-)) that is constant on each grid cell
/// [t_k, t_{k+1}). Stored as K rows of one value per state.
class ControlTable {
 public:
  ControlTable() = default;
  ControlTable(TimeGrid grid, StateSpace states, std::vector<double> values);

  static ControlTable constant(const TimeGrid& grid, const StateSpace& states, double value);
  /// Samples fn at the left end t_k of every cell.
  static ControlTable sample(const TimeGrid& grid, const StateSpace& states,
                             const std::function<double(double t, State x)>& fn);

  const TimeGrid& grid() const noexcept { return grid_; }
  const StateSpace& states() const noexcept { return states_; }
  double at(std::size_t k, std::size_t i) const { return values_[k * states_.size() + i]; }
  double& at(std::size_t k, std::size_t i) { return values_[k * states_.size() + i]; }
  double operator()(double t, State x) const { return at(grid_.cell(t), states_.index_of(x)); }
  /// Control signal reading x(t^-) from the path prefix.
  Control as_control() const;

  friend double sup_distance(const ControlTable& a, const ControlTable& b);

 private:
  TimeGrid grid_;
  StateSpace states_;
  std::vector<double> values_;
};

/// Markovian controlled chain with scalar mean-field coupling:
/// lambda_ij(t, m, v) with m = E[kappa(x(t))], running cost
/// f(t, i, m_f, v) with m_f = E[kappa_f(x(t))] and terminal cost
/// h(i, m_h) with m_h = E[kappa_h(x(T))]. The *_dmean partial derivatives
/// in the mean argument feed the mean-field terms of the adjoint equation;
/// leave them empty when a quantity does not depend on its mean.
struct ControlledChain {
  GeneratorMatrix reference;
  std::function<double(double t, State i, State j, double mean, double v)> rate;
  std::function<double(double t, State i, State j, double mean, double v)> rate_dmean;
  std::function<double(double t, State i, double mean_f, double v)> running;
  std::function<double(double t, State i, double mean_f, double v)> running_dmean;
  std::function<double(State i, double mean_h)> terminal;
  std::function<double(State i, double mean_h)> terminal_dmean;
  StateFunction kappa = identity_function();
  StateFunction kappa_f = identity_function();
  StateFunction kappa_h = identity_function();
  ControlSet controls;
  /// Upper bound on total exit rates used for thinning; when unset it is
  /// computed from the control table and mean curve on the grid.
  std::optional<double> rate_bound;

  const StateSpace& states() const noexcept { return reference.states(); }
  bool mean_coupled() const noexcept {
    return static_cast<bool>(rate_dmean) || static_cast<bool>(running_dmean) || static_cast<bool>(terminal_dmean);
  }

  /// Off-diagonal rates out of state index i into `row` (entry i set to 0).
  void rates(double t, std::size_t i, double mean, double v, std::span<double> row) const;
  double running_cost(double t, State i, double mean_f, double v) const;
  double terminal_cost(State i, double mean_h) const;
};

/// Intensity lambda(t, x(t^-), m, u) of the model; `majorant` bounds the
/// total exit rate.
IntensitySpec make_intensity(const ControlledChain& model, double majorant);

/// Cost functional of the model in CostSpec form.
CostSpec make_cost(const ControlledChain& model);

/// Measure change for a feedback table and an optional mean curve on the
/// table's grid. The thinning majorant is model.rate_bound or 1.05 times the
/// largest total rate met on the grid.
MeasureChange make_measure_change(const ControlledChain& model, const ControlTable& control,
                                  std::optional<MeanCurve> mean);

}  // namespace mfchain
