#include "mfchain/schlogl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfchain {

void SchloglSpec::validate() const {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "Schlogl truncation needs n_max >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidArgument, "beta must be >= 0");
  if (!(birth >= 0.0) || !std::isfinite(birth)) throw Error(ErrorKind::InvalidArgument, "birth rate must be >= 0");
  if (!(reference_death > 0.0)) throw Error(ErrorKind::InvalidArgument, "reference death rate must be positive");
  if (x0 < 0 || x0 > n_max) throw Error(ErrorKind::InvalidArgument, "x0 outside {0, ..., n_max}");
  if (!(control_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "control bound must be positive");
  if (!base_rates.empty()) {
    const auto n = static_cast<std::size_t>(n_max) + 2;
    if (base_rates.size() != n) throw Error(ErrorKind::InvalidArgument, "base rates must be (n_max+2) square");
    for (const auto& row : base_rates) {
      if (row.size() != n) throw Error(ErrorKind::InvalidArgument, "base rates must be (n_max+2) square");
      for (double r : row)
        if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::NegativeRate, "base rates must be >= 0");
    }
  }
}

double SchloglSpec::base_rate(State i, State j) const {
  if (j == i || j == i - 1 || j < 0) return 0.0;
  if (base_rates.empty()) return j == i + 1 ? birth : 0.0;
  return base_rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

GeneratorMatrix schlogl_reference(const SchloglSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_max) + 1;
  std::vector<std::vector<double>> rates(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double r = j + 1 == i ? spec.reference_death : spec.base_rate(static_cast<State>(i), static_cast<State>(j));
      rates[i][j] = r;
      off += r;
    }
    rates[i][i] = -off;
  }
  return validate_generator(rates, spec.states());
}

namespace {

double death_rate(const SchloglSpec& spec, const SchloglCounters& counters, double v, double mean) {
  double r = v + spec.beta * mean;
  if (r < 0.0) {
    counters.floor_hits->fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return r;
}

void fill_row(const SchloglSpec& spec, const SchloglCounters& counters, State i, double mean, double v,
              std::span<double> row) {
  for (State j = 0; j <= spec.n_max; ++j)
    row[static_cast<std::size_t>(j)] = j == i - 1 ? death_rate(spec, counters, v, mean) : spec.base_rate(i, j);
  if (i == spec.n_max && spec.base_rate(i, i + 1) > 0.0)
    counters.truncations->fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

IntensitySpec ex3_intensity(const SchloglSpec& spec, SchloglCounters counters, double majorant) {
  spec.validate();
  IntensitySpec intensity;
  intensity.support = spec.states();
  if (majorant <= 0.0) {
    double base = 0.0;
    for (State i = 0; i <= spec.n_max; ++i) {
      double s = 0.0;
      for (State j = 0; j <= spec.n_max; ++j) s += spec.base_rate(i, j);
      base = std::max(base, s);
    }
    majorant = base + 1.0 + spec.beta * spec.n_max;
  }
  intensity.majorant = majorant;
  intensity.evaluate = [spec, counters](double, const PathPrefix& prefix, double mean, double v,
                                        std::span<double> row) { fill_row(spec, counters, prefix.current(), mean, v, row); };
  return intensity;
}

double ex3_schlogl_control(const PathPrefix& prefix, double) { return prefix.current() == 0 ? 0.0 : 1.0; }

Control ex3_control() { return [](double t, const PathPrefix& prefix) { return ex3_schlogl_control(prefix, t); }; }

ControlledChain ex3_model(const SchloglSpec& spec, SchloglCounters counters) {
  ControlledChain model;
  model.reference = schlogl_reference(spec);
  model.rate = [spec, counters](double, State i, State j, double mean, double v) {
    return j == i - 1 ? death_rate(spec, counters, v, mean) : spec.base_rate(i, j);
  };
  if (spec.beta > 0.0) {
    model.rate_dmean = [spec](double, State i, State j, double mean, double v) {
      return j == i - 1 && v + spec.beta * mean > 0.0 ? spec.beta : 0.0;
    };
  }
  model.running = [](double, State, double, double v) { return 0.5 * v * v; };
  model.terminal = [](State x, double) { return static_cast<double>(x); };
  model.controls = {0.0, spec.control_max};
  return model;
}

}  // namespace mfchain
