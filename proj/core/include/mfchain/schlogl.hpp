#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/model.hpp"

namespace mfchain {

/// Birth-death chain on {0, ..., n_max} whose down-jump rate i -> i-1 is
/// u + beta E[x(t)] and whose other rates come from a banded base matrix.
/// An empty base_rates means birth rate `birth` to i+1 (band width 2). Rates
/// leading above n_max are dropped and counted.
struct SchloglSpec {
  int n_max = 20;
  double birth = 1.0;
  double beta = 0.1;
  /// Reference rate on the down-jump band (the reference generator needs it
  /// positive for the measure change to exist).
  double reference_death = 1.0;
  State x0 = 5;
  double control_max = 1e6;
  /// Optional (n_max+2) x (n_max+2) matrix of base rates; the last row and
  /// column stand for the first state beyond the truncation.
  std::vector<std::vector<double>> base_rates;

  void validate() const;
  StateSpace states() const { return StateSpace::range(0, n_max); }
  /// Base rate i -> j for j != i - 1 on the untruncated band.
  double base_rate(State i, State j) const;
};

/// Event counters shared by every copy of an intensity or model.
struct SchloglCounters {
  /// Evaluations where u + beta mu < 0 and the rate was floored at 0.
  std::shared_ptr<std::atomic<long>> floor_hits = std::make_shared<std::atomic<long>>(0);
  /// Evaluations at n_max that dropped a positive rate to n_max + 1.
  std::shared_ptr<std::atomic<long>> truncations = std::make_shared<std::atomic<long>>(0);
};

GeneratorMatrix schlogl_reference(const SchloglSpec& spec);

/// Intensity with the control value as the down-jump base. `majorant`
/// defaults to a bound for controls up to 1 and means up to n_max.
IntensitySpec ex3_intensity(const SchloglSpec& spec, SchloglCounters counters = {}, double majorant = 0.0);

/// 1 - I_0(x(t^-))
double ex3_schlogl_control(const PathPrefix& prefix, double t);
Control ex3_control();

/// Controlled model: running cost v^2 / 2, terminal cost x(T), mean
/// E[x(t)] entering the down-jump rate.
ControlledChain ex3_model(const SchloglSpec& spec, SchloglCounters counters = {});

}  // namespace mfchain
