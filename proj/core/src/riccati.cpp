#include "mfchain/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfchain/parallel.hpp"

namespace mfchain {

namespace {

constexpr double kBisectionTol = 1e-6;

double rk4_step(const RiccatiParams& p, double mu, double h) {
  double k1 = p.rhs(mu);
  double k2 = p.rhs(mu + 0.5 * h * k1);
  double k3 = p.rhs(mu + 0.5 * h * k2);
  double k4 = p.rhs(mu + h * k3);
  return mu + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double hermite(double t0, double y0, double f0, double t1, double y1, double f1, double t) {
  double h = t1 - t0;
  double s = (t - t0) / h;
  double s2 = s * s;
  double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1;
}

}  // namespace

RiccatiParams ex2_riccati_coeffs(State a, State b, double alpha, double m0) {
  if (!(a >= 0 && a < b)) throw Error(ErrorKind::InvalidArgument, "Riccati coefficients need 0 <= a < b");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "Riccati coefficients need alpha > 0");
  const double da = a;
  const double db = b;
  RiccatiParams p;
  p.A = 2.0 * (db - da) - 1.0;
  p.B = 3.0 * da * da + da * (1.0 - 2.0 * db) - db * db;
  p.C = alpha * db + da * (db * db - da * da);
  p.m0 = m0;
  p.exit_level = 0.5 * (da + db);
  p.lower_level = 0.0;
  return p;
}

MeanCurve RiccatiSolution::as_curve() const {
  if (times.size() < 2) throw Error(ErrorKind::InvalidArgument, "Riccati trajectory has fewer than two nodes");
  return MeanCurve(TimeGrid(times.back(), times.size() - 1), values, "identity");
}

RiccatiSolution solve_constrained_riccati(const RiccatiParams& params, double dt, double t_max,
                                          bool keep_trajectory) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "Riccati step must be positive");
  if (!(t_max >= 0.0)) throw Error(ErrorKind::InvalidArgument, "Riccati horizon must be nonnegative");
  RiccatiSolution sol;
  auto outside = [&](double mu) { return mu > params.exit_level || mu < params.lower_level; };
  double mu = params.m0;
  if (!std::isfinite(mu)) throw NonFiniteStateError("initial mean is not finite", 0.0);
  if (keep_trajectory) {
    sol.times.push_back(0.0);
    sol.values.push_back(mu);
  }
  if (outside(mu)) {
    sol.exit_time = 0.0;
    return sol;
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    double t_next = std::min(t_max, static_cast<double>(k) * dt);
    double h = t_next - t;
    double next = rk4_step(params, mu, h);
    if (!std::isfinite(next))
      throw NonFiniteStateError("Riccati solution blew up after t=" + std::to_string(t), t);
    if (outside(next)) {
      double level = next > params.exit_level ? params.exit_level : params.lower_level;
      double f0 = params.rhs(mu);
      double f1 = params.rhs(next);
      double lo = t;
      double hi = t_next;
      bool rising = next > mu;
      while (hi - lo > kBisectionTol) {
        double mid = 0.5 * (lo + hi);
        double v = hermite(t, mu, f0, t_next, next, f1, mid);
        bool past = rising ? v > level : v < level;
        (past ? hi : lo) = mid;
      }
      sol.exit_time = 0.5 * (lo + hi);
      return sol;
    }
    mu = next;
    t = t_next;
    if (keep_trajectory) {
      sol.times.push_back(t);
      sol.values.push_back(mu);
    }
  }
  return sol;
}

std::optional<double> riccati_exit_time_closed_form(const RiccatiParams& p) {
  if (p.A == 0.0) throw Error(ErrorKind::ZeroQuadraticCoefficient, "closed form needs A != 0");
  const double m0 = p.m0;
  if (m0 > p.exit_level || m0 < p.lower_level) return 0.0;
  const double f0 = p.rhs(m0);
  if (f0 == 0.0) return std::nullopt;
  const double level = f0 > 0.0 ? p.exit_level : p.lower_level;
  const double D = p.B * p.B - 4.0 * p.A * p.C;
  const double scale = std::max({1.0, p.B * p.B, std::abs(4.0 * p.A * p.C)});
  const double lo = std::min(m0, level);
  const double hi = std::max(m0, level);

  if (std::abs(D) <= 1e-12 * scale) {
    const double r = -p.B / (2.0 * p.A);
    if (r >= lo && r <= hi) return std::nullopt;
    auto F = [&](double mu) { return -1.0 / (p.A * (mu - r)); };
    return F(level) - F(m0);
  }
  if (D < 0.0) {
    const double s = std::sqrt(-D);
    auto F = [&](double mu) { return 2.0 / s * std::atan((2.0 * p.A * mu + p.B) / s); };
    return F(level) - F(m0);
  }
  const double s = std::sqrt(D);
  const double r1 = (-p.B - s) / (2.0 * p.A);
  const double r2 = (-p.B + s) / (2.0 * p.A);
  for (double r : {r1, r2})
    if (r >= lo && r <= hi) return std::nullopt;
  auto F = [&](double mu) { return std::log(std::abs((mu - r2) / (mu - r1))) / (p.A * (r2 - r1)); };
  return F(level) - F(m0);
}

MeanCurve riccati_curve(const RiccatiParams& params, const TimeGrid& grid, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "Riccati step must be positive");
  std::vector<double> values(grid.points());
  double mu = params.m0;
  values[0] = mu;
  const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(grid.step() / dt - 1e-9)));
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    double h = (grid.time(k + 1) - grid.time(k)) / static_cast<double>(sub);
    for (std::size_t s = 0; s < sub; ++s) mu = rk4_step(params, mu, h);
    if (!std::isfinite(mu))
      throw NonFiniteStateError("Riccati solution blew up after t=" + std::to_string(grid.time(k)), grid.time(k));
    values[k + 1] = mu;
  }
  return MeanCurve(grid, std::move(values), "identity");
}

std::vector<RiccatiRow> riccati_table(const std::vector<RiccatiCase>& cases, double dt, double t_max,
                                      unsigned threads) {
  std::vector<RiccatiRow> rows(cases.size());
  parallel_chunks(cases.size(), threads == 0 ? default_thread_count() : threads,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t k = begin; k < end; ++k) {
                      const auto& c = cases[k];
                      auto params = ex2_riccati_coeffs(c.a, c.b, c.alpha, c.m0);
                      rows[k] = {c, solve_constrained_riccati(params, dt, t_max, false).exit_time};
                    }
                  });
  return rows;
}

}  // namespace mfchain
