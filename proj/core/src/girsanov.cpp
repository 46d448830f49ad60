#include "mfchain/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfchain/parallel.hpp"
#include "path_eval.hpp"

namespace mfchain {

namespace detail {

namespace {

double simpson_step(const std::function<double(double)>& fn, double a, double fa, double m, double fm, double b,
                    double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = fn(lm);
  double frm = fn(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(fn, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(fn, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double fa = fn(a);
  double fb = fn(b);
  double m = 0.5 * (a + b);
  double fm = fn(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(fn, a, fa, m, fm, b, fb, whole, tol, 40);
}

DensityWalker::DensityWalker(const MeasureChange& change)
    : change_(change), row_(change.intensity.support.size()) {}

std::span<const double> DensityWalker::rates(double t, const PathPrefix& prefix) {
  evaluate_rates(change_.intensity, t, prefix, change_.mean_at(t), change_.control_at(t, prefix), row_);
  std::size_t i = index_of(prefix.current());
  auto g = change_.reference.row(i);
  for (std::size_t j = 0; j < row_.size(); ++j) {
    if (j != i && row_[j] > 0.0 && !(g[j] > 0.0))
      throw Error(ErrorKind::UnsupportedTransition,
                  "lambda(" + std::to_string(prefix.current()) + "," +
                      std::to_string(change_.intensity.support.value(j)) + ") > 0 where the reference rate is 0");
  }
  return row_;
}

double DensityWalker::excess_rate(double t, const PathPrefix& prefix) {
  auto r = rates(t, prefix);
  std::size_t i = index_of(prefix.current());
  double total = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    if (j != i) total += r[j];
  return total - change_.reference.exit_rate(i);
}

double DensityWalker::segment_exponent(double t0, double t1, const PathPrefix& prefix) {
  if (change_.intensity.piecewise_constant) return -excess_rate(0.5 * (t0 + t1), prefix) * (t1 - t0);
  return -adaptive_simpson([&](double s) { return excess_rate(s, prefix); }, t0, t1, 1e-10);
}

double DensityWalker::jump_log_factor(const JumpEvent& event, const PathPrefix& before) {
  auto r = rates(event.time, before);
  std::size_t i = index_of(before.current());
  std::size_t j = index_of(event.to);
  double g = change_.reference.rate(i, j);
  if (!(g > 0.0))
    throw Error(ErrorKind::UnsupportedTransition, "path jumps along an edge with zero reference rate");
  if (!(r[j] > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(r[j] / g);
}

void log_density_on_grid(const JumpPath& path, DensityWalker& walker, std::vector<double>& out) {
  const TimeGrid& grid = walker.change().grid;
  out.assign(grid.points(), 0.0);
  double log_l = 0.0;
  walk_path(
      path, grid, [&](double t0, double t1, const PathPrefix& p) { log_l += walker.segment_exponent(t0, t1, p); },
      [&](const JumpEvent& e, const PathPrefix& p) { log_l += walker.jump_log_factor(e, p); },
      [&](std::size_t k, State) { out[k] = log_l; });
}

void check_compatible(const MeasureChange& change, double horizon) {
  if (!(change.intensity.support == change.reference.states()))
    throw Error(ErrorKind::InvalidArgument, "intensity support differs from the reference state space");
  if (std::abs(change.grid.horizon() - horizon) > 1e-12 * std::max(1.0, horizon))
    throw Error(ErrorKind::InvalidArgument, "evaluation grid horizon differs from the path horizon");
  if (change.mean && !(change.mean->grid() == change.grid))
    throw Error(ErrorKind::InvalidArgument, "mean curve grid differs from the evaluation grid");
}

}  // namespace detail

LikelihoodRatioField::LikelihoodRatioField(IntensitySpec intensity, GeneratorMatrix reference)
    : intensity_(std::move(intensity)), reference_(std::move(reference)) {
  if (!(intensity_.support == reference_.states()))
    throw Error(ErrorKind::InvalidArgument, "intensity support differs from the reference state space");
}

void LikelihoodRatioField::row(double t, const PathPrefix& prefix, double mean, double control,
                               std::span<double> out) const {
  evaluate_rates(intensity_, t, prefix, mean, control, out);
  std::size_t i = intensity_.support.index_of(prefix.current());
  auto g = reference_.row(i);
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (j == i) {
      out[j] = 0.0;
    } else if (g[j] > 0.0) {
      out[j] = out[j] / g[j] - 1.0;
    } else if (out[j] > 0.0) {
      throw Error(ErrorKind::UnsupportedTransition,
                  "lambda(" + std::to_string(prefix.current()) + "," + std::to_string(intensity_.support.value(j)) +
                      ") > 0 where the reference rate is 0");
    } else {
      out[j] = 0.0;
    }
  }
}

double LikelihoodRatioField::operator()(double t, const PathPrefix& prefix, double mean, double control,
                                        State j) const {
  std::vector<double> out(intensity_.support.size());
  row(t, prefix, mean, control, out);
  return out[intensity_.support.index_of(j)];
}

LikelihoodRatioField likelihood_ratio_field(const IntensitySpec& intensity, const GeneratorMatrix& reference) {
  return LikelihoodRatioField(intensity, reference);
}

DensityTrajectory density_product(const JumpPath& path, const MeasureChange& change) {
  detail::check_compatible(change, path.horizon());
  detail::DensityWalker walker(change);
  DensityTrajectory out;
  double log_l = 0.0;
  auto record = [&](double t) {
    if (!out.times.empty() && out.times.back() == t) {
      out.values.back() = std::exp(log_l);
    } else {
      out.times.push_back(t);
      out.values.push_back(std::exp(log_l));
    }
  };
  detail::walk_path(
      path, change.grid,
      [&](double t0, double t1, const PathPrefix& p) {
        if (!out.zero_rate_at_jump) log_l += walker.segment_exponent(t0, t1, p);
      },
      [&](const JumpEvent& e, const PathPrefix& p) {
        if (!out.zero_rate_at_jump) {
          log_l += walker.jump_log_factor(e, p);
          if (std::isinf(log_l)) {
            out.zero_rate_at_jump = true;
            out.zero_rate_time = e.time;
          }
        }
        record(e.time);
      },
      [&](std::size_t k, State) { record(change.grid.time(k)); });
  return out;
}

DensityTrajectory density_sde_euler(const JumpPath& path, const MeasureChange& change, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "Euler step must be positive");
  detail::check_compatible(change, path.horizon());
  detail::DensityWalker walker(change);
  DensityTrajectory out;
  double l = 1.0;
  auto record = [&](double t) {
    if (!out.times.empty() && out.times.back() == t) {
      out.values.back() = l;
    } else {
      out.times.push_back(t);
      out.values.push_back(l);
    }
  };
  detail::walk_path(
      path, change.grid,
      [&](double t0, double t1, const PathPrefix& p) {
        auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
        steps = std::max<std::size_t>(steps, 1);
        double h = (t1 - t0) / static_cast<double>(steps);
        for (std::size_t s = 0; s < steps; ++s) {
          double mid = t0 + (static_cast<double>(s) + 0.5) * h;
          l -= l * walker.excess_rate(mid, p) * h;
        }
      },
      [&](const JumpEvent& e, const PathPrefix& p) {
        double factor = std::exp(walker.jump_log_factor(e, p));
        if (factor == 0.0 && !out.zero_rate_at_jump) {
          out.zero_rate_at_jump = true;
          out.zero_rate_time = e.time;
        }
        l *= factor;
        record(e.time);
      },
      [&](std::size_t k, State) { record(change.grid.time(k)); });
  return out;
}

double log_density_terminal(const JumpPath& path, const MeasureChange& change) {
  detail::check_compatible(change, path.horizon());
  detail::DensityWalker walker(change);
  std::vector<double> logs;
  detail::log_density_on_grid(path, walker, logs);
  return logs.back();
}

bool MartingaleReport::all_pass() const {
  return pass_L && std::all_of(per_edge.begin(), per_edge.end(), [](const EdgeCheck& e) { return e.pass; });
}

namespace {

bool within(double mean, double target, double se) { return std::abs(mean - target) <= 3.0 * se + 1e-12; }

}  // namespace

MartingaleReport martingale_checks(const MeasureChange& change, const PathEnsemble& ensemble,
                                   std::vector<std::pair<State, State>> edges, unsigned threads) {
  const std::size_t n = ensemble.size();
  if (n < 2) throw Error(ErrorKind::InsufficientPaths, "martingale checks need at least 2 paths");
  detail::check_compatible(change, ensemble.horizon);
  const auto& space = change.reference.states();
  if (edges.empty()) {
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t j = 0; j < space.size(); ++j)
        if (i != j && change.reference.rate(i, j) > 0.0) edges.emplace_back(space.value(i), space.value(j));
  }
  std::vector<std::pair<std::size_t, std::size_t>> edge_idx;
  for (auto [i, j] : edges) edge_idx.emplace_back(space.index_of(i), space.index_of(j));
  const std::size_t width = 1 + edges.size();
  std::vector<double> samples(n * width);

  parallel_chunks(n, detail::resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    detail::DensityWalker walker(change);
    std::vector<double> martingale(edges.size());
    for (std::size_t p = begin; p < end; ++p) {
      const JumpPath& path = ensemble.paths[p];
      std::fill(martingale.begin(), martingale.end(), 0.0);
      double log_l = 0.0;
      detail::walk_path(
          path, change.grid,
          [&](double t0, double t1, const PathPrefix& pre) {
            log_l += walker.segment_exponent(t0, t1, pre);
            std::size_t i = walker.index_of(pre.current());
            for (std::size_t e = 0; e < edge_idx.size(); ++e) {
              if (edge_idx[e].first != i) continue;
              std::size_t j = edge_idx[e].second;
              double compensator;
              if (change.intensity.piecewise_constant) {
                compensator = walker.rates(0.5 * (t0 + t1), pre)[j] * (t1 - t0);
              } else {
                compensator = detail::adaptive_simpson([&](double s) { return walker.rates(s, pre)[j]; }, t0, t1,
                                                       1e-10);
              }
              martingale[e] -= compensator;
            }
          },
          [&](const JumpEvent& ev, const PathPrefix& pre) {
            log_l += walker.jump_log_factor(ev, pre);
            std::size_t i = walker.index_of(pre.current());
            std::size_t j = walker.index_of(ev.to);
            for (std::size_t e = 0; e < edge_idx.size(); ++e)
              if (edge_idx[e].first == i && edge_idx[e].second == j) martingale[e] += 1.0;
          },
          [](std::size_t, State) {});
      double l = std::exp(log_l);
      double* row = samples.data() + p * width;
      row[0] = l;
      for (std::size_t e = 0; e < edges.size(); ++e) row[1 + e] = l * martingale[e];
    }
  });

  MartingaleReport report;
  report.n_paths = n;
  std::vector<double> column(n);
  for (std::size_t c = 0; c < width; ++c) {
    for (std::size_t p = 0; p < n; ++p) column[p] = samples[p * width + c];
    SampleMoments m = sample_moments(column);
    if (c == 0) {
      report.mean_L = m.mean;
      report.se_L = m.standard_error;
      report.pass_L = within(m.mean, 1.0, m.standard_error);
    } else {
      EdgeCheck check;
      check.i = edges[c - 1].first;
      check.j = edges[c - 1].second;
      check.mean = m.mean;
      check.se = m.standard_error;
      check.pass = within(m.mean, 0.0, m.standard_error);
      report.per_edge.push_back(check);
    }
  }
  return report;
}

MartingaleReport martingale_checks(const MeasureChange& change, const InitialLaw& law, double horizon,
                                   std::size_t n, std::uint64_t seed, std::vector<std::pair<State, State>> edges,
                                   unsigned threads) {
  if (n < 2) throw Error(ErrorKind::InsufficientPaths, "martingale checks need at least 2 paths");
  PathEnsemble ensemble =
      simulate_reference(change.reference, law, horizon, n, seed, detail::resolve_threads(threads));
  return martingale_checks(change, ensemble, std::move(edges), threads);
}

}  // namespace mfchain
