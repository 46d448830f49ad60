#include "mfchain/two_state.hpp"

#include <cmath>

namespace mfchain {

void TwoStateSpec::validate() const {
  if (!(a >= 0 && a < b)) throw Error(ErrorKind::InvalidArgument, "two-state chain needs 0 <= a < b");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (!(g_ab > 0.0) || !(g_ba > 0.0)) throw Error(ErrorKind::InvalidArgument, "reference rates must be positive");
  if (!(h_b >= h_a)) throw Error(ErrorKind::InvalidArgument, "terminal cost needs h(b) >= h(a)");
  if (!(control_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "control bound must be positive");
}

GeneratorMatrix two_state_reference(const TwoStateSpec& spec) {
  spec.validate();
  return validate_generator({{-spec.g_ab, spec.g_ab}, {spec.g_ba, -spec.g_ba}}, spec.states());
}

ControlledChain ex1_model(const TwoStateSpec& spec) {
  ControlledChain model;
  model.reference = two_state_reference(spec);
  model.rate = [spec](double, State i, State, double, double v) { return i == spec.a ? spec.alpha : v; };
  model.running = [](double, State, double, double v) { return 0.5 * v * v; };
  model.terminal = [spec](State x, double) { return spec.h(x); };
  model.controls = {0.0, spec.control_max};
  return model;
}

double ex1_optimal_control(const TwoStateSpec& spec, const PathPrefix& prefix, double) {
  return spec.h(prefix.current()) - spec.h_a;
}

Control ex1_control(const TwoStateSpec& spec) {
  return [spec](double t, const PathPrefix& prefix) { return ex1_optimal_control(spec, prefix, t); };
}

std::pair<double, double> ex1_adjoint_closed_form(const TwoStateSpec& spec) {
  return {spec.h_a - spec.h_b, spec.h_b - spec.h_a};
}

ControlledChain ex2_model(const TwoStateSpec& spec) {
  ControlledChain model;
  model.reference = two_state_reference(spec);
  model.rate = [spec](double, State i, State, double mean, double v) { return i == spec.a ? spec.alpha : v + mean; };
  model.rate_dmean = [spec](double, State i, State, double, double) { return i == spec.a ? 0.0 : 1.0; };
  model.running = [](double, State, double, double v) { return 0.5 * v * v; };
  model.terminal = [](State x, double mean_h) {
    double d = static_cast<double>(x) - mean_h;
    return d * d;
  };
  model.terminal_dmean = [](State x, double mean_h) { return -2.0 * (static_cast<double>(x) - mean_h); };
  model.controls = {0.0, spec.control_max};
  return model;
}

namespace {

double ex2_value(const TwoStateSpec& spec, double mu, State x) {
  if (x != spec.b) return 0.0;
  double a = spec.a;
  double b = spec.b;
  return (b * b - a * a) + 2.0 * mu * (a - b);
}

}  // namespace

double ex2_optimal_control(const TwoStateSpec& spec, const MeanCurve& mu, const PathPrefix& prefix, double t) {
  return ex2_value(spec, mu.left_value(t), prefix.current());
}

Control ex2_control(const TwoStateSpec& spec, const MeanCurve& mu) {
  return [spec, mu](double t, const PathPrefix& prefix) { return ex2_optimal_control(spec, mu, prefix, t); };
}

ControlTable ex2_control_table(const TwoStateSpec& spec, const MeanCurve& mu) {
  const TimeGrid& grid = mu.grid();
  StateSpace states = spec.states();
  std::vector<double> values(grid.intervals() * 2);
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    values[2 * k] = ex2_value(spec, mu.value(k), spec.a);
    values[2 * k + 1] = ex2_value(spec, mu.value(k), spec.b);
  }
  return ControlTable(grid, states, std::move(values));
}

}  // namespace mfchain
