#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/parallel.hpp"

namespace mfchain::detail {

inline unsigned resolve_threads(unsigned threads) { return threads == 0 ? default_thread_count() : threads; }

/// Splits [0, T] at jump times and grid points and reports, in time order:
/// segment(t0, t1, prefix) for each open residence piece, jump(event, prefix
/// before the jump) and point(k, state) at each grid point (state is x(t_k)).
template <class Segment, class Jump, class Point>
void walk_path(const JumpPath& path, const TimeGrid& grid, Segment&& segment, Jump&& jump, Point&& point) {
  const auto& ev = path.events();
  const std::size_t n = ev.size();
  const std::size_t K = grid.intervals();
  std::size_t e = 0;
  std::size_t k = 1;
  double t = 0.0;
  point(std::size_t{0}, path.initial());
  while (k <= K) {
    double tg = grid.time(k);
    double te = e < n ? ev[e].time : std::numeric_limits<double>::infinity();
    double next = std::min(tg, te);
    PathPrefix prefix{path.initial(), std::span<const JumpEvent>(ev.data(), e)};
    if (next > t) segment(t, next, prefix);
    if (te <= tg) {
      jump(ev[e], prefix);
      ++e;
    }
    if (tg <= te) {
      PathPrefix after{path.initial(), std::span<const JumpEvent>(ev.data(), e)};
      point(k, after.current());
      ++k;
    }
    t = next;
  }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tol);

/// Rate evaluation along a path for one measure change. Caches nothing
/// between calls; each instance owns scratch rows, so use one per thread.
class DensityWalker {
 public:
  explicit DensityWalker(const MeasureChange& change);

  /// Validated lambda row at t for the given prefix; also enforces absolute
  /// continuity against the reference (UnsupportedTransition).
  std::span<const double> rates(double t, const PathPrefix& prefix);

  /// sum_j (lambda_ij - g_ij) on a segment at t.
  double excess_rate(double t, const PathPrefix& prefix);

  /// -int_{t0}^{t1} sum_j (lambda_ij - g_ij) ds for the current state.
  double segment_exponent(double t0, double t1, const PathPrefix& prefix);

  /// log(lambda_ij / g_ij) for the jump; -inf when lambda_ij = 0.
  double jump_log_factor(const JumpEvent& event, const PathPrefix& before);

  const MeasureChange& change() const noexcept { return change_; }
  std::size_t index_of(State s) const { return change_.intensity.support.index_of(s); }

 private:
  const MeasureChange& change_;
  std::vector<double> row_;
};

/// log L^u at every grid point of change.grid (size K+1).
void log_density_on_grid(const JumpPath& path, DensityWalker& walker, std::vector<double>& out);

void check_compatible(const MeasureChange& change, double horizon);

/// Sample means and standard errors of L^u(t_k) v_c(x(t_k)) for each table
/// v_c (one value per support state). Result [c][k].
struct GridMoments {
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> se;
};
GridMoments grid_expectations(const MeasureChange& change, const PathEnsemble& ensemble,
                              const std::vector<std::vector<double>>& tables, unsigned threads);

}  // namespace mfchain::detail
