#include "mfchain/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfchain/parallel.hpp"
#include "mfchain/random.hpp"
#include "path_eval.hpp"

namespace mfchain {

const char* to_string(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::Direct ? "direct" : "reweighted";
}

namespace {

double running_value(const CostSpec& spec, double t, State x, double mean_f, double u) {
  return spec.running ? spec.running(t, x, mean_f, u) : 0.0;
}

double terminal_value(const CostSpec& spec, State x, double mean_h) {
  return spec.terminal ? spec.terminal(x, mean_h) : 0.0;
}

/// int_0^h exp(-c s) ds
double decay_integral(double c, double h) {
  double ch = c * h;
  if (std::abs(ch) < 1e-12) return h * (1.0 - 0.5 * ch);
  return -std::expm1(-ch) / c;
}

void require_paths(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InsufficientPaths, "cost estimation needs at least 2 paths, got " + std::to_string(n));
}

CostEstimate summarize(const std::vector<double>& samples, EstimatorKind kind) {
  SampleMoments m = sample_moments(samples);
  return {m.mean, m.standard_error, samples.size(), kind};
}

}  // namespace

std::vector<double> reweighted_cost_samples(const CostSpec& spec, const MeasureChange& change,
                                            const PathEnsemble& ensemble, unsigned threads) {
  const std::size_t n = ensemble.size();
  require_paths(n);
  detail::check_compatible(change, ensemble.horizon);
  const auto& space = change.intensity.support;
  std::vector<double> kf(space.size());
  std::vector<double> kh(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    kf[i] = spec.kappa_f ? spec.kappa_f(space.value(i)) : 0.0;
    kh[i] = spec.kappa_h ? spec.kappa_h(space.value(i)) : 0.0;
  }
  auto inner = detail::grid_expectations(change, ensemble, {kf, kh}, threads);
  const MeanCurve running_mean(change.grid, inner.mean[0], "kappa_f");
  const double terminal_mean = inner.mean[1].back();
  const bool exact = change.intensity.piecewise_constant;

  std::vector<double> samples(n);
  parallel_chunks(n, detail::resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    detail::DensityWalker walker(change);
    for (std::size_t p = begin; p < end; ++p) {
      double log_l = 0.0;
      double total = 0.0;
      detail::walk_path(
          ensemble.paths[p], change.grid,
          [&](double t0, double t1, const PathPrefix& pre) {
            State x = pre.current();
            if (exact) {
              double mid = 0.5 * (t0 + t1);
              double c = walker.excess_rate(mid, pre);
              double f = running_value(spec, mid, x, running_mean.left_value(mid), change.control_at(mid, pre));
              if (f != 0.0) total += std::exp(log_l) * f * decay_integral(c, t1 - t0);
              log_l -= c * (t1 - t0);
            } else {
              double base = log_l;
              total += detail::adaptive_simpson(
                  [&](double s) {
                    double f = running_value(spec, s, x, running_mean.left_value(s), change.control_at(s, pre));
                    if (f == 0.0) return 0.0;
                    return std::exp(base + walker.segment_exponent(t0, s, pre)) * f;
                  },
                  t0, t1, 1e-10);
              log_l += walker.segment_exponent(t0, t1, pre);
            }
          },
          [&](const JumpEvent& e, const PathPrefix& pre) { log_l += walker.jump_log_factor(e, pre); },
          [](std::size_t, State) {});
      const JumpPath& path = ensemble.paths[p];
      samples[p] = total + std::exp(log_l) * terminal_value(spec, path.terminal(), terminal_mean);
    }
  });
  return samples;
}

CostEstimate estimate_cost_reweighted(const CostSpec& spec, const MeasureChange& change,
                                      const PathEnsemble& ensemble, unsigned threads) {
  return summarize(reweighted_cost_samples(spec, change, ensemble, threads), EstimatorKind::Reweighted);
}

CostEstimate estimate_cost_reweighted(const CostSpec& spec, const MeasureChange& change, const InitialLaw& law,
                                      double horizon, std::size_t n, std::uint64_t seed, unsigned threads) {
  require_paths(n);
  auto ensemble = simulate_reference(change.reference, law, horizon, n, seed, detail::resolve_threads(threads));
  return estimate_cost_reweighted(spec, change, ensemble, threads);
}

CostEstimate estimate_cost_direct(const CostSpec& spec, const MeasureChange& change, const InitialLaw& law,
                                  double horizon, std::size_t n, std::uint64_t seed, unsigned threads) {
  require_paths(n);
  law.validate(change.intensity.support);
  if (std::abs(change.grid.horizon() - horizon) > 1e-12 * std::max(1.0, horizon))
    throw Error(ErrorKind::InvalidArgument, "evaluation grid horizon differs from the path horizon");
  const MeanCurve* mean = change.mean_ptr();
  const double terminal_mean = mean ? mean->terminal() : 0.0;
  const bool exact = change.intensity.piecewise_constant;
  std::vector<double> samples(n);
  parallel_chunks(n, detail::resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      JumpPath path = simulate_path(change.intensity, mean, change.control, law, horizon, stream_seed(seed, p));
      double total = 0.0;
      detail::walk_path(
          path, change.grid,
          [&](double t0, double t1, const PathPrefix& pre) {
            State x = pre.current();
            auto f = [&](double s) { return running_value(spec, s, x, change.mean_at(s), change.control_at(s, pre)); };
            if (exact) {
              total += f(0.5 * (t0 + t1)) * (t1 - t0);
            } else {
              total += detail::adaptive_simpson(f, t0, t1, 1e-10);
            }
          },
          [](const JumpEvent&, const PathPrefix&) {}, [](std::size_t, State) {});
      samples[p] = total + terminal_value(spec, path.terminal(), terminal_mean);
    }
  });
  return summarize(samples, EstimatorKind::Direct);
}

std::vector<Perturbation> canned_perturbations(const TimeGrid& grid, const StateFunction& weight, double magnitude) {
  struct Shape {
    const char* name;
    double (*value)(double);
  };
  static constexpr Shape shapes[] = {
      {"flat", [](double) { return 1.0; }},
      {"ramp_up", [](double s) { return s; }},
      {"ramp_down", [](double s) { return 1.0 - s; }},
      {"bump", [](double s) { return 4.0 * s * (1.0 - s); }},
  };
  std::vector<Perturbation> out;
  for (const auto& shape : shapes) {
    for (double sign : {1.0, -1.0}) {
      Perturbation p;
      p.label = std::string(sign > 0 ? "+" : "-") + shape.name;
      auto fn = shape.value;
      p.delta = [grid, weight, fn, scale = sign * magnitude](double t, const PathPrefix& prefix) {
        double left = grid.time(grid.cell(t)) / grid.horizon();
        return scale * fn(left) * weight(prefix.current());
      };
      out.push_back(std::move(p));
    }
  }
  return out;
}

bool ProbeReport::all_non_improving() const {
  return std::all_of(entries.begin(), entries.end(), [](const ProbeEntry& e) { return e.non_improving; });
}

namespace {

void check_admissible(const MeasureChange& change, const ControlSet& admissible, const PathEnsemble& ensemble,
                      const std::string& label) {
  for (const auto& path : ensemble.paths) {
    detail::walk_path(
        path, change.grid,
        [&](double t0, double t1, const PathPrefix& pre) {
          double mid = 0.5 * (t0 + t1);
          double v = change.control_at(mid, pre);
          if (!admissible.contains(v))
            throw Error(ErrorKind::InadmissiblePerturbation,
                        label + ": control " + std::to_string(v) + " outside [" + std::to_string(admissible.lo) +
                            ", " + std::to_string(admissible.hi) + "] at t=" + std::to_string(mid));
        },
        [](const JumpEvent&, const PathPrefix&) {}, [](std::size_t, State) {});
  }
}

std::vector<double> probe_samples(const ProbeSetup& setup, MeasureChange& change, const PathEnsemble& ensemble,
                                  const std::string& label, unsigned threads) {
  check_admissible(change, setup.admissible, ensemble, label);
  try {
    if (setup.kappa) {
      auto fp = solve_mean_fixed_point(change, *setup.kappa, ensemble, setup.fixed_point, "kappa", threads);
      change.mean = fp.curve;
    }
    return reweighted_cost_samples(setup.cost, change, ensemble, threads);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidRate || e.kind() == ErrorKind::NegativeRate)
      throw Error(ErrorKind::InadmissiblePerturbation, label + ": " + e.what());
    throw;
  }
}

}  // namespace

ProbeReport perturbation_probe(const ProbeSetup& setup, const std::vector<Perturbation>& directions, double eps,
                               const PathEnsemble& ensemble, unsigned threads) {
  require_paths(ensemble.size());
  setup.admissible.validate();
  MeasureChange anchor = setup.base;
  std::vector<double> base = probe_samples(setup, anchor, ensemble, "base", threads);
  ProbeReport report;
  report.base_value = sample_moments(base).mean;
  std::size_t good = 0;
  for (const auto& dir : directions) {
    MeasureChange perturbed = anchor;
    perturbed.control = [base_control = setup.base.control, delta = dir.delta, eps](double t, const PathPrefix& p) {
      double u = base_control ? base_control(t, p) : 0.0;
      return u + eps * delta(t, p);
    };
    std::vector<double> samples = probe_samples(setup, perturbed, ensemble, dir.label, threads);
    for (std::size_t k = 0; k < samples.size(); ++k) samples[k] -= base[k];
    SampleMoments m = sample_moments(samples);
    ProbeEntry entry{dir.label, m.mean, m.standard_error, m.mean >= -3.0 * m.standard_error};
    good += entry.non_improving ? 1 : 0;
    report.entries.push_back(entry);
  }
  report.fraction_non_improving =
      directions.empty() ? 1.0 : static_cast<double>(good) / static_cast<double>(directions.size());
  return report;
}

}  // namespace mfchain
