#include "mfchain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mfchain/parallel.hpp"
#include "mfchain/random.hpp"

namespace mfchain {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr double kMajorantSlack = 1e-12;

}  // namespace

double GeneratorMatrix::max_exit_rate() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, exit_rate(i));
  return m;
}

double GeneratorMatrix::apply(std::size_t i, const StateFunction& f) const {
  double fi = f(states_.value(i));
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j)
    if (j != i) s += rate(i, j) * (f(states_.value(j)) - fi);
  return s;
}

GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates, const StateSpace& states) {
  const std::size_t n = states.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "generator needs at least one state");
  if (rates.size() != n) throw Error(ErrorKind::InvalidArgument, "generator must be square and match the states");
  GeneratorMatrix g;
  g.states_ = states;
  g.rates_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rates[i].size() != n)
      throw Error(ErrorKind::InvalidArgument, "generator must be square and match the states");
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double r = rates[i][j];
      if (!std::isfinite(r)) throw Error(ErrorKind::InvalidRate, "generator entries must be finite");
      if (j == i) continue;
      if (r < 0.0)
        throw Error(ErrorKind::NegativeRate, "g(" + std::to_string(states.value(i)) + "," +
                                                 std::to_string(states.value(j)) + ") = " + std::to_string(r));
      off += r;
      g.rates_[i * n + j] = r;
    }
    double row_sum = off + rates[i][i];
    if (std::abs(row_sum) > kRowSumTolerance)
      throw Error(ErrorKind::RowSumViolation,
                  "row " + std::to_string(states.value(i)) + " sums to " + std::to_string(row_sum));
    g.rates_[i * n + i] = -off;
  }
  return g;
}

JumpPath::JumpPath(State x0, std::vector<JumpEvent> events, double horizon)
    : x0_(x0), events_(std::move(events)), horizon_(horizon) {
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
    throw Error(ErrorKind::InvalidPath, "horizon must be finite and nonnegative");
  State prev_state = x0_;
  double prev_time = 0.0;
  for (const auto& e : events_) {
    if (!(e.time > prev_time) || e.time > horizon_)
      throw Error(ErrorKind::InvalidPath, "event times must be strictly increasing in (0, T]");
    if (e.to == prev_state) throw Error(ErrorKind::InvalidPath, "event at t=" + std::to_string(e.time) + " does not change the state");
    prev_state = e.to;
    prev_time = e.time;
  }
}

State JumpPath::state_at(double t) const {
  auto it = std::upper_bound(events_.begin(), events_.end(), t,
                             [](double v, const JumpEvent& e) { return v < e.time; });
  return it == events_.begin() ? x0_ : std::prev(it)->to;
}

State JumpPath::state_before(double t) const {
  auto it = std::lower_bound(events_.begin(), events_.end(), t,
                             [](const JumpEvent& e, double v) { return e.time < v; });
  return it == events_.begin() ? x0_ : std::prev(it)->to;
}

IntensitySpec reference_intensity(const GeneratorMatrix& g) {
  IntensitySpec spec;
  spec.support = g.states();
  spec.majorant = g.max_exit_rate();
  spec.evaluate = [g](double, const PathPrefix& prefix, double, double, std::span<double> row) {
    auto src = g.row(g.states().index_of(prefix.current()));
    std::copy(src.begin(), src.end(), row.begin());
  };
  return spec;
}

void evaluate_rates(const IntensitySpec& intensity, double t, const PathPrefix& prefix, double mean,
                    double control, std::span<double> row) {
  std::fill(row.begin(), row.end(), 0.0);
  intensity.evaluate(t, prefix, mean, control, row);
  std::size_t i = intensity.support.index_of(prefix.current());
  row[i] = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!(row[j] >= 0.0) || !std::isfinite(row[j]))
      throw Error(ErrorKind::InvalidRate, "rate " + std::to_string(prefix.current()) + "->" +
                                              std::to_string(intensity.support.value(j)) + " at t=" +
                                              std::to_string(t) + " is " + std::to_string(row[j]));
  }
}

State InitialLaw::sample(double uniform) const {
  if (states.size() == 1) return states.front();
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double target = uniform * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    acc += weights[k];
    if (target < acc) return states[k];
  }
  return states.back();
}

void InitialLaw::validate(const StateSpace& space) const {
  if (states.empty() || states.size() != weights.size())
    throw Error(ErrorKind::InvalidArgument, "initial law needs one weight per state");
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!space.contains(states[k]))
      throw Error(ErrorKind::InvalidArgument, "initial state " + std::to_string(states[k]) + " outside the support");
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k]))
      throw Error(ErrorKind::InvalidArgument, "initial weights must be finite and nonnegative");
    total += weights[k];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "initial law has zero mass");
}

namespace {

JumpPath thin(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control, State x0,
              double horizon, PathRng& rng) {
  if (!intensity.support.contains(x0))
    throw Error(ErrorKind::InvalidArgument, "initial state " + std::to_string(x0) + " outside the support");
  const double bound = intensity.majorant;
  if (!(bound >= 0.0) || !std::isfinite(bound))
    throw Error(ErrorKind::InvalidArgument, "rate majorant must be finite and nonnegative");
  std::vector<JumpEvent> events;
  std::vector<double> row(intensity.support.size());
  double t = 0.0;
  while (true) {
    t += rng.exponential(bound);
    if (!(t <= horizon)) break;
    PathPrefix prefix{x0, events};
    double m = mean ? mean->left_value(t) : 0.0;
    double u = control ? control(t, prefix) : 0.0;
    evaluate_rates(intensity, t, prefix, m, u, row);
    double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > bound * (1.0 + kMajorantSlack))
      throw Error(ErrorKind::MajorantViolation, "total exit rate " + std::to_string(total) + " exceeds majorant " +
                                                    std::to_string(bound) + " at t=" + std::to_string(t));
    double pick = rng.uniform() * bound;
    if (pick >= total) continue;
    double acc = 0.0;
    std::size_t target = row.size();
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] <= 0.0) continue;
      acc += row[j];
      target = j;
      if (pick < acc) break;
    }
    if (target == row.size()) continue;
    events.push_back({t, intensity.support.value(target)});
  }
  return JumpPath(x0, std::move(events), horizon);
}

}  // namespace

JumpPath simulate_path(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control, State x0,
                       double horizon, std::uint64_t seed) {
  PathRng rng(seed);
  return thin(intensity, mean, control, x0, horizon, rng);
}

JumpPath simulate_path(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control,
                       const InitialLaw& law, double horizon, std::uint64_t seed) {
  law.validate(intensity.support);
  PathRng rng(seed);
  State x0 = law.states.size() == 1 ? law.states.front() : law.sample(rng.uniform());
  return thin(intensity, mean, control, x0, horizon, rng);
}

PathEnsemble simulate_paths(const IntensitySpec& intensity, const MeanCurve* mean, const Control& control,
                            const InitialLaw& law, double horizon, std::size_t n, std::uint64_t master_seed,
                            unsigned threads) {
  law.validate(intensity.support);
  PathEnsemble ensemble;
  ensemble.horizon = horizon;
  ensemble.master_seed = master_seed;
  ensemble.paths.resize(n);
  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      ensemble.paths[k] = simulate_path(intensity, mean, control, law, horizon, stream_seed(master_seed, k));
  });
  return ensemble;
}

PathEnsemble simulate_reference(const GeneratorMatrix& g, const InitialLaw& law, double horizon, std::size_t n,
                                std::uint64_t master_seed, unsigned threads) {
  return simulate_paths(reference_intensity(g), nullptr, Control{}, law, horizon, n, master_seed, threads);
}

PathStatistics path_statistics(const JumpPath& path) {
  PathStatistics stats;
  State current = path.initial();
  double t = 0.0;
  long displacement = 0;
  for (const auto& e : path.events()) {
    stats.occupation[current] += e.time - t;
    ++stats.counts[{current, e.to}];
    displacement += static_cast<long>(e.to) - static_cast<long>(current);
    current = e.to;
    t = e.time;
  }
  stats.occupation[current] += path.horizon() - t;
  stats.representation_residual =
      static_cast<long>(path.terminal()) - static_cast<long>(path.initial()) - displacement;
  return stats;
}

double dynkin_residual(const JumpPath& path, const GeneratorMatrix& g, const StateFunction& f) {
  const auto& space = g.states();
  double integral = 0.0;
  State current = path.initial();
  double t = 0.0;
  for (const auto& e : path.events()) {
    integral += g.apply(space.index_of(current), f) * (e.time - t);
    current = e.to;
    t = e.time;
  }
  integral += g.apply(space.index_of(current), f) * (path.horizon() - t);
  return f(path.terminal()) - f(path.initial()) - integral;
}

QuadraticVariation optional_variation(const JumpPath& path, const GeneratorMatrix& g) {
  QuadraticVariation qv;
  qv.optional = static_cast<double>(path.jumps());
  for (const auto& [state, time] : path_statistics(path).occupation)
    qv.predictable += g.exit_rate(g.states().index_of(state)) * time;
  return qv;
}

}  // namespace mfchain
