#include "mfchain/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfchain/parallel.hpp"
#include "path_eval.hpp"

namespace mfchain {

namespace detail {

GridMoments grid_expectations(const MeasureChange& change, const PathEnsemble& ensemble,
                              const std::vector<std::vector<double>>& tables, unsigned threads) {
  const std::size_t n = ensemble.size();
  if (n < 2) throw Error(ErrorKind::InsufficientPaths, "mean estimation needs at least 2 paths");
  check_compatible(change, ensemble.horizon);
  const std::size_t points = change.grid.points();
  const std::size_t funcs = tables.size();
  const std::size_t width = 2 * funcs * points;
  BlockAccumulator acc(n, width);
  const unsigned workers = resolve_threads(threads);
  parallel_chunks(acc.blocks(), workers, [&](std::size_t b0, std::size_t b1) {
    DensityWalker walker(change);
    std::vector<std::size_t> states(points);
    std::vector<double> l(points);
    for (std::size_t b = b0; b < b1; ++b) {
      auto row = acc.block(b);
      std::size_t end = std::min(n, (b + 1) * BlockAccumulator::kBlockSize);
      for (std::size_t p = b * BlockAccumulator::kBlockSize; p < end; ++p) {
        double log_l = 0.0;
        walk_path(
            ensemble.paths[p], change.grid,
            [&](double t0, double t1, const PathPrefix& pre) { log_l += walker.segment_exponent(t0, t1, pre); },
            [&](const JumpEvent& e, const PathPrefix& pre) { log_l += walker.jump_log_factor(e, pre); },
            [&](std::size_t k, State s) {
              l[k] = std::exp(log_l);
              states[k] = walker.index_of(s);
            });
        for (std::size_t c = 0; c < funcs; ++c) {
          double* sums = row.data() + 2 * c * points;
          for (std::size_t k = 0; k < points; ++k) {
            double v = l[k] * tables[c][states[k]];
            sums[k] += v;
            sums[points + k] += v * v;
          }
        }
      }
    }
  });
  std::vector<double> total = acc.total();
  GridMoments out;
  out.mean.assign(funcs, std::vector<double>(points));
  out.se.assign(funcs, std::vector<double>(points));
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < funcs; ++c) {
    const double* sums = total.data() + 2 * c * points;
    for (std::size_t k = 0; k < points; ++k) {
      double mean = sums[k] / dn;
      double var = std::max(0.0, (sums[points + k] - dn * mean * mean) / (dn - 1.0));
      out.mean[c][k] = mean;
      out.se[c][k] = std::sqrt(var / dn);
    }
  }
  return out;
}

}  // namespace detail

void FixedPointConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "fixed-point tolerance must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorKind::InvalidArgument, "damping must lie in (0, 1]");
  if (n_paths < 2) throw Error(ErrorKind::InsufficientPaths, "fixed point needs at least 2 paths per iteration");
  if (!(se_multiplier >= 0.0)) throw Error(ErrorKind::InvalidArgument, "se_multiplier must be nonnegative");
  if (max_iters == 0) throw Error(ErrorKind::InvalidArgument, "fixed point needs max_iters >= 1");
}

double MeanEstimate::max_se() const {
  double m = 0.0;
  for (double s : standard_error) m = std::max(m, s);
  return m;
}

namespace {

std::vector<double> tabulate(const StateSpace& space, const StateFunction& f) {
  std::vector<double> v(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) v[i] = f(space.value(i));
  return v;
}

}  // namespace

MeanEstimate estimate_mean_curve(const MeasureChange& change, const StateFunction& kappa,
                                 const PathEnsemble& ensemble, const std::string& kappa_tag, unsigned threads) {
  auto table = tabulate(change.intensity.support, kappa);
  auto [lo, hi] = std::minmax_element(table.begin(), table.end());
  auto moments = detail::grid_expectations(change, ensemble, {table}, threads);
  std::vector<double> values = std::move(moments.mean[0]);
  for (double& v : values) v = std::clamp(v, *lo, *hi);
  return {MeanCurve(change.grid, std::move(values), kappa_tag), std::move(moments.se[0])};
}

MeanEstimate estimate_mean_curve(const MeasureChange& change, const StateFunction& kappa, const InitialLaw& law,
                                 double horizon, std::size_t n, std::uint64_t seed, const std::string& kappa_tag,
                                 unsigned threads) {
  if (n < 2) throw Error(ErrorKind::InsufficientPaths, "mean estimation needs at least 2 paths");
  auto ensemble = simulate_reference(change.reference, law, horizon, n, seed, detail::resolve_threads(threads));
  return estimate_mean_curve(change, kappa, ensemble, kappa_tag, threads);
}

MarginalCurve estimate_marginals(const MeasureChange& change, const PathEnsemble& ensemble, unsigned threads) {
  const auto& space = change.intensity.support;
  std::vector<std::vector<double>> tables(space.size(), std::vector<double>(space.size(), 0.0));
  for (std::size_t i = 0; i < space.size(); ++i) tables[i][i] = 1.0;
  auto moments = detail::grid_expectations(change, ensemble, tables, threads);
  const std::size_t points = change.grid.points();
  std::vector<double> probs(points * space.size());
  for (std::size_t k = 0; k < points; ++k)
    for (std::size_t i = 0; i < space.size(); ++i) probs[k * space.size() + i] = moments.mean[i][k];
  return MarginalCurve(change.grid, space.size(), std::move(probs));
}

FixedPointResult solve_mean_fixed_point(const MeasureChange& change, const StateFunction& kappa,
                                        const PathEnsemble& ensemble, const FixedPointConfig& cfg,
                                        const std::string& kappa_tag, unsigned threads) {
  cfg.validate();
  MeasureChange work = change;
  if (!work.mean) {
    double start = 0.0;
    for (const auto& path : ensemble.paths) start += kappa(path.initial());
    start /= static_cast<double>(std::max<std::size_t>(1, ensemble.size()));
    work.mean = MeanCurve::constant(work.grid, start, kappa_tag);
  }
  FixedPointResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter <= cfg.max_iters; ++iter) {
    MeanEstimate est = estimate_mean_curve(work, kappa, ensemble, kappa_tag, threads);
    double residual = sup_distance(est.curve, *work.mean);
    double se = est.max_se();
    if (residual < best.residual) best = {*work.mean, iter, residual, se};
    if (residual <= cfg.tol + cfg.se_multiplier * se) return {*work.mean, iter, residual, se};
    if (iter == cfg.max_iters) break;
    std::vector<double> next(work.grid.points());
    for (std::size_t k = 0; k < next.size(); ++k)
      next[k] = (1.0 - cfg.damping) * work.mean->value(k) + cfg.damping * est.curve.value(k);
    work.mean = MeanCurve(work.grid, std::move(next), kappa_tag);
  }
  throw NoConvergenceError("mean fixed point not reached after " + std::to_string(cfg.max_iters) +
                               " iterations (best residual " + std::to_string(best.residual) + ")",
                           best);
}

FixedPointResult solve_mean_fixed_point(const MeasureChange& change, const StateFunction& kappa,
                                        const InitialLaw& law, double horizon, const FixedPointConfig& cfg,
                                        std::uint64_t seed, const std::string& kappa_tag, unsigned threads) {
  cfg.validate();
  auto ensemble =
      simulate_reference(change.reference, law, horizon, cfg.n_paths, seed, detail::resolve_threads(threads));
  return solve_mean_fixed_point(change, kappa, ensemble, cfg, kappa_tag, threads);
}

}  // namespace mfchain
