#include "mfchain/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfchain/parallel.hpp"
#include "path_eval.hpp"

namespace mfchain {

double g_inner(std::span<const double> m, std::span<const double> n, const GeneratorMatrix& g, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (j != i) s += m[j] * n[j] * g.rate(i, j);
  return s;
}

AdjointField::AdjointField(TimeGrid grid, StateSpace states, std::vector<double> phi)
    : grid_(grid), states_(std::move(states)), phi_(std::move(phi)) {
  if (phi_.size() != grid_.points() * states_.size())
    throw Error(ErrorKind::InvalidArgument, "adjoint field has the wrong shape");
}

void AdjointField::q_row(std::size_t k, std::size_t i, std::span<double> out) const {
  auto r = row(k);
  for (std::size_t j = 0; j < r.size(); ++j) out[j] = r[j] - r[i];
}

AdjointField solve_adjoint_ode(const DriverSpec& spec, const GeneratorMatrix& g, const TimeGrid& grid) {
  if (!spec.driver || !spec.terminal) throw Error(ErrorKind::InvalidArgument, "driver spec needs driver and terminal");
  const std::size_t n = g.size();
  const std::size_t K = grid.intervals();
  std::vector<double> phi(grid.points() * n);
  std::vector<double> q(n);

  auto deriv = [&](double t, std::span<const double> state, std::span<double> out) {
    MeanTerms terms = spec.mean_terms ? spec.mean_terms(t, state) : MeanTerms{};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) q[j] = state[j] - state[i];
      double compensator = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) compensator += g.rate(i, j) * q[j];
      out[i] = -(spec.driver(t, i, q, terms) + compensator);
    }
  };
  auto check = [&](std::span<const double> state, double t) {
    for (double v : state)
      if (!std::isfinite(v))
        throw NonFiniteFieldError("adjoint field is not finite at t=" + std::to_string(t), t);
  };

  std::span<double> last(phi.data() + K * n, n);
  for (std::size_t i = 0; i < n; ++i) last[i] = spec.terminal(i);
  check(last, grid.horizon());

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t k = K; k > 0; --k) {
    const double t = grid.time(k);
    const double h = t - grid.time(k - 1);
    std::span<const double> cur(phi.data() + k * n, n);
    deriv(t, cur, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = cur[i] - 0.5 * h * k1[i];
    deriv(t - 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = cur[i] - 0.5 * h * k2[i];
    deriv(t - 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = cur[i] - h * k3[i];
    deriv(t - h, tmp, k4);
    std::span<double> next(phi.data() + (k - 1) * n, n);
    for (std::size_t i = 0; i < n; ++i) next[i] = cur[i] - h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check(next, grid.time(k - 1));
  }
  return AdjointField(grid, g.states(), std::move(phi));
}

double hamiltonian_value(const ControlledChain& model, double t, std::size_t i, double v, double weight,
                         std::span<const double> q_row, double mean, double mean_f) {
  const auto& g = model.reference;
  std::vector<double> row(g.size());
  model.rates(t, i, mean, v, row);
  double inner = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (j == i) continue;
    double gij = g.rate(i, j);
    if (gij > 0.0) {
      inner += (row[j] - gij) * q_row[j];
    } else if (row[j] > 0.0) {
      throw Error(ErrorKind::UnsupportedTransition, "controlled rate is positive where the reference rate is 0");
    }
  }
  return weight * (inner - model.running_cost(t, g.states().value(i), mean_f, v));
}

namespace {

constexpr double kQuadraticFitTol = 1e-9;
constexpr std::size_t kScanPoints = 257;
constexpr double kGoldenTol = 1e-10;

HamiltonianMax golden_refine(const std::function<double(double)>& fn, double a, double b, double best_v,
                             double best_h) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  const double tol = kGoldenTol * std::max(1.0, std::abs(best_v));
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  double v = 0.5 * (a + b);
  double h = fn(v);
  if (h > best_h) return {v, h, false};
  return {best_v, best_h, false};
}

}  // namespace

HamiltonianMax maximize_scalar(const std::function<double(double)>& fn, const ControlSet& U) {
  U.validate();
  const double lo = U.lo;
  const double hi = U.hi;
  const double w = hi - lo;
  if (w == 0.0) return {lo, fn(lo), false};

  auto at = [&](double s) { return lo + s * w; };
  const double h0 = fn(lo);
  const double hm = fn(at(0.5));
  const double h1 = fn(hi);
  const double a = 2.0 * (h1 - 2.0 * hm + h0);
  const double b = h1 - h0 - a;
  bool quadratic = std::isfinite(h0) && std::isfinite(hm) && std::isfinite(h1);
  if (quadratic) {
    double scale = std::max({1.0, std::abs(h0), std::abs(hm), std::abs(h1)});
    for (double s : {0.25, 0.75}) {
      double actual = fn(at(s));
      if (!std::isfinite(actual) || std::abs(a * s * s + b * s + h0 - actual) > kQuadraticFitTol * scale) {
        quadratic = false;
        break;
      }
    }
    if (quadratic) {
      if (a < -kQuadraticFitTol * scale) {
        double v = at(std::clamp(-b / (2.0 * a), 0.0, 1.0));
        // Re-fit on a short stencil around the vertex to shed the rounding
        // of the wide fit.
        double d = std::min(0.25 * w, 1e-3 * std::max(1.0, std::abs(v)));
        double c = std::clamp(v, lo + d, hi - d);
        double fl = fn(c - d), fc = fn(c), fr = fn(c + d);
        double curv = fl - 2.0 * fc + fr;
        if (curv < 0.0) v = std::clamp(c - 0.5 * d * (fr - fl) / curv, lo, hi);
        return {v, fn(v), false};
      }
      if (h1 > h0 + 1e-12 * scale) return {hi, h1, false};
      return {lo, h0, false};
    }
  }

  std::vector<double> vals(kScanPoints);
  std::size_t best = 0;
  for (std::size_t k = 0; k < kScanPoints; ++k) {
    double v = k + 1 == kScanPoints ? hi : lo + w * static_cast<double>(k) / static_cast<double>(kScanPoints - 1);
    vals[k] = fn(v);
    if (vals[k] > vals[best]) best = k;
  }
  auto grid_v = [&](std::size_t k) {
    return k + 1 == kScanPoints ? hi : lo + w * static_cast<double>(k) / static_cast<double>(kScanPoints - 1);
  };
  double a_br = grid_v(best == 0 ? 0 : best - 1);
  double b_br = grid_v(std::min(best + 1, kScanPoints - 1));
  return golden_refine(fn, a_br, b_br, grid_v(best), vals[best]);
}

namespace {

bool rates_feasible(const ControlledChain& model, double t, std::size_t i, double mean, double v) {
  std::vector<double> row(model.states().size());
  model.rates(t, i, mean, v, row);
  for (std::size_t j = 0; j < row.size(); ++j)
    if (j != i && !(row[j] >= 0.0)) return false;
  return true;
}

}  // namespace

HamiltonianMax maximize_hamiltonian(const ControlledChain& model, double t, std::size_t i,
                                    std::span<const double> q_row, double mean, double mean_f) {
  auto h = [&](double v) { return hamiltonian_value(model, t, i, v, 1.0, q_row, mean, mean_f); };
  HamiltonianMax best = maximize_scalar(h, model.controls);
  if (rates_feasible(model, t, i, mean, best.control)) return best;
  auto masked = [&](double v) {
    return rates_feasible(model, t, i, mean, v) ? h(v) : -std::numeric_limits<double>::infinity();
  };
  HamiltonianMax projected = maximize_scalar(masked, model.controls);
  projected.projected = true;
  return projected;
}

namespace {

double curve_at(const std::optional<MeanCurve>& curve, double t) { return curve ? curve->interpolate(t) : 0.0; }

}  // namespace

DriverSpec smp_driver(const ControlledChain& model, const AdjointInputs& inputs) {
  if (model.mean_coupled() && !inputs.marginals)
    throw Error(ErrorKind::InvalidArgument, "mean-coupled model needs the marginal law for the adjoint driver");
  const auto& space = model.states();
  auto select = [&model, &inputs](double t, std::size_t i, std::span<const double> q, double m, double mf) {
    if (inputs.control) return inputs.control(t, model.states().value(i));
    return maximize_hamiltonian(model, t, i, q, m, mf).control;
  };

  DriverSpec spec;
  if (model.mean_coupled()) {
    spec.mean_terms = [&model, &inputs, &space, select](double t, std::span<const double> phi) {
      const std::size_t n = space.size();
      std::vector<double> pi(n), q(n);
      inputs.marginals->interpolate(t, pi);
      double m = curve_at(inputs.mean, t);
      double mf = curve_at(inputs.mean_f, t);
      MeanTerms terms;
      for (std::size_t k = 0; k < n; ++k) {
        if (pi[k] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) q[j] = phi[j] - phi[k];
        double v = select(t, k, q, m, mf);
        if (model.rate_dmean) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j)
            if (j != k) s += model.rate_dmean(t, space.value(k), space.value(j), m, v) * q[j];
          terms.rate_term += pi[k] * s;
        }
        if (model.running_dmean) terms.running_term += pi[k] * model.running_dmean(t, space.value(k), mf, v);
      }
      return terms;
    };
  }
  spec.driver = [&model, &inputs, select](double t, std::size_t i, std::span<const double> q,
                                          const MeanTerms& terms) {
    double m = curve_at(inputs.mean, t);
    double mf = curve_at(inputs.mean_f, t);
    double v = select(t, i, q, m, mf);
    State x = model.states().value(i);
    return hamiltonian_value(model, t, i, v, 1.0, q, m, mf) + model.kappa(x) * terms.rate_term -
           model.kappa_f(x) * terms.running_term;
  };
  spec.terminal = [&model, &inputs](std::size_t i) {
    const auto& sp = model.states();
    State x = sp.value(i);
    double value = -model.terminal_cost(x, inputs.mean_h);
    if (model.terminal_dmean && inputs.marginals) {
      auto pi = inputs.marginals->at(inputs.marginals->grid().intervals());
      double e = 0.0;
      for (std::size_t k = 0; k < sp.size(); ++k) e += pi[k] * model.terminal_dmean(sp.value(k), inputs.mean_h);
      value -= model.kappa_h(x) * e;
    }
    return value;
  };
  return spec;
}

ControlTable control_from_field(const ControlledChain& model, const AdjointField& field, const AdjointInputs& inputs) {
  const TimeGrid& grid = field.grid();
  const auto& space = model.states();
  std::vector<double> values(grid.intervals() * space.size());
  std::vector<double> q(space.size());
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    double t = grid.time(k);
    double m = curve_at(inputs.mean, t);
    double mf = curve_at(inputs.mean_f, t);
    for (std::size_t i = 0; i < space.size(); ++i) {
      field.q_row(k, i, q);
      values[k * space.size() + i] = maximize_hamiltonian(model, t, i, q, m, mf).control;
    }
  }
  return ControlTable(grid, space, std::move(values));
}

StationarityReport check_stationarity(const ControlledChain& model, const AdjointField& field,
                                      const AdjointInputs& inputs, const Control& control,
                                      const std::vector<JumpPath>& paths, double tol) {
  const TimeGrid& grid = field.grid();
  const auto& space = model.states();
  const ControlSet& U = model.controls;
  StationarityReport report;
  report.tolerance = tol;
  for (std::size_t k = 0; k < grid.points(); ++k)
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t j = 0; j < space.size(); ++j) report.scale = std::max(report.scale, std::abs(field.q(k, i, j)));
  const double limit = tol * report.scale;

  std::vector<double> q(space.size());
  for (const auto& path : paths) {
    const auto& ev = path.events();
    std::size_t e = 0;
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
      double t = grid.time(k);
      while (e < ev.size() && ev[e].time < t) ++e;
      PathPrefix prefix{path.initial(), std::span<const JumpEvent>(ev.data(), e)};
      State x = prefix.current();
      std::size_t i = space.index_of(x);
      double u = control(t, prefix);
      double m = curve_at(inputs.mean, t);
      double mf = curve_at(inputs.mean_f, t);
      field.q_row(k, i, q);
      auto h = [&](double v) { return hamiltonian_value(model, t, i, v, 1.0, q, m, mf); };
      double step = 1e-6 * std::max(1.0, std::abs(u));
      double d;
      if (u - step < U.lo) {
        d = std::max(0.0, (h(u + step) - h(u)) / step);
      } else if (u + step > U.hi) {
        d = std::min(0.0, (h(u) - h(u - step)) / step);
      } else {
        d = (h(u + step) - h(u - step)) / (2.0 * step);
      }
      double ad = std::abs(d);
      report.max_abs_derivative = std::max(report.max_abs_derivative, ad);
      ++report.samples;
      ++report.samples_by_state[x];
      if (!(ad <= limit)) {
        ++report.violations;
        ++report.violations_by_state[x];
      }
    }
  }
  report.fraction_within = report.samples == 0
                               ? 1.0
                               : 1.0 - static_cast<double>(report.violations) / static_cast<double>(report.samples);
  return report;
}

CoupledResult solve_coupled(const ControlledChain& model, const InitialLaw& law, const TimeGrid& grid,
                            const CoupledConfig& cfg, unsigned threads) {
  CoupledResult result;
  const auto& space = model.states();
  law.validate(space);
  if (!model.mean_coupled()) {
    result.field = solve_adjoint_ode(smp_driver(model, result.inputs), model.reference, grid);
    result.control = control_from_field(model, result.field, result.inputs);
    result.rounds = 1;
    result.converged = true;
    return result;
  }

  cfg.fixed_point.validate();
  PathEnsemble ensemble = simulate_reference(model.reference, law, grid.horizon(), cfg.fixed_point.n_paths, cfg.seed,
                                             detail::resolve_threads(threads));
  ControlTable table = cfg.initial ? *cfg.initial : ControlTable::constant(grid, space, model.controls.clamp(0.0));
  std::optional<MeanCurve> mean;
  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    MeasureChange change = make_measure_change(model, table, mean);
    bool fixed_ok = true;
    FixedPointResult fp;
    try {
      fp = solve_mean_fixed_point(change, model.kappa, ensemble, cfg.fixed_point, "kappa", threads);
    } catch (const NoConvergenceError& e) {
      fp = e.best();
      fixed_ok = false;
    }
    mean = fp.curve;
    change = make_measure_change(model, table, mean);
    MarginalCurve marginals = estimate_marginals(change, ensemble, threads);

    AdjointInputs inputs;
    inputs.mean = mean;
    inputs.mean_f = marginals.expectation(space, model.kappa_f, "kappa_f");
    inputs.mean_h = marginals.expectation(space, model.kappa_h, "kappa_h").terminal();
    inputs.marginals = marginals;

    result.field = solve_adjoint_ode(smp_driver(model, inputs), model.reference, grid);
    ControlTable next = control_from_field(model, result.field, inputs);
    result.last_change = sup_distance(next, table);
    result.rounds = round;
    result.mean = mean;
    result.marginals = marginals;
    result.inputs = inputs;
    table = std::move(next);
    result.control = table;
    if (result.last_change <= cfg.tol) {
      result.converged = fixed_ok;
      break;
    }
  }
  return result;
}

}  // namespace mfchain
