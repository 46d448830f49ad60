#include "mfchain/model.hpp"

#include <algorithm>
#include <cmath>

namespace mfchain {

ControlTable::ControlTable(TimeGrid grid, StateSpace states, std::vector<double> values)
    : grid_(grid), states_(std::move(states)), values_(std::move(values)) {
  if (values_.size() != grid_.intervals() * states_.size())
    throw Error(ErrorKind::InvalidArgument, "control table needs one value per cell and state");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "control table values must be finite");
}

ControlTable ControlTable::constant(const TimeGrid& grid, const StateSpace& states, double value) {
  return ControlTable(grid, states, std::vector<double>(grid.intervals() * states.size(), value));
}

ControlTable ControlTable::sample(const TimeGrid& grid, const StateSpace& states,
                                  const std::function<double(double, State)>& fn) {
  std::vector<double> values(grid.intervals() * states.size());
  for (std::size_t k = 0; k < grid.intervals(); ++k)
    for (std::size_t i = 0; i < states.size(); ++i) values[k * states.size() + i] = fn(grid.time(k), states.value(i));
  return ControlTable(grid, states, std::move(values));
}

Control ControlTable::as_control() const {
  return [table = *this](double t, const PathPrefix& prefix) { return table(t, prefix.current()); };
}

double sup_distance(const ControlTable& a, const ControlTable& b) {
  if (a.values_.size() != b.values_.size())
    throw Error(ErrorKind::InvalidArgument, "control tables have different shapes");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values_.size(); ++k) d = std::max(d, std::abs(a.values_[k] - b.values_[k]));
  return d;
}

void ControlledChain::rates(double t, std::size_t i, double mean, double v, std::span<double> row) const {
  const auto& space = states();
  State from = space.value(i);
  for (std::size_t j = 0; j < space.size(); ++j) row[j] = j == i ? 0.0 : rate(t, from, space.value(j), mean, v);
}

double ControlledChain::running_cost(double t, State i, double mean_f, double v) const {
  return running ? running(t, i, mean_f, v) : 0.0;
}

double ControlledChain::terminal_cost(State i, double mean_h) const {
  return terminal ? terminal(i, mean_h) : 0.0;
}

IntensitySpec make_intensity(const ControlledChain& model, double majorant) {
  IntensitySpec spec;
  spec.support = model.states();
  spec.majorant = majorant;
  spec.evaluate = [model](double t, const PathPrefix& prefix, double mean, double v, std::span<double> row) {
    model.rates(t, model.states().index_of(prefix.current()), mean, v, row);
  };
  return spec;
}

CostSpec make_cost(const ControlledChain& model) {
  CostSpec spec;
  spec.running = [model](double t, State x, double mean_f, double v) { return model.running_cost(t, x, mean_f, v); };
  spec.terminal = [model](State x, double mean_h) { return model.terminal_cost(x, mean_h); };
  spec.kappa_f = model.kappa_f;
  spec.kappa_h = model.kappa_h;
  return spec;
}

MeasureChange make_measure_change(const ControlledChain& model, const ControlTable& control,
                                  std::optional<MeanCurve> mean) {
  const TimeGrid& grid = control.grid();
  double bound = 0.0;
  if (model.rate_bound) {
    bound = *model.rate_bound;
  } else {
    const auto& space = model.states();
    std::vector<double> row(space.size());
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
      double t0 = grid.time(k);
      double t1 = grid.time(k + 1);
      double m = mean ? mean->value(k) : 0.0;
      for (std::size_t i = 0; i < space.size(); ++i) {
        for (double t : {t0, 0.5 * (t0 + t1), t1}) {
          model.rates(t, i, m, control.at(k, i), row);
          double total = 0.0;
          for (double r : row) total += std::max(0.0, r);
          bound = std::max(bound, total);
        }
      }
    }
    bound *= 1.05;
  }
  MeasureChange change;
  change.intensity = make_intensity(model, bound);
  change.reference = model.reference;
  change.control = control.as_control();
  change.mean = std::move(mean);
  change.grid = grid;
  return change;
}

}  // namespace mfchain
