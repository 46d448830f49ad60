#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mfchain/adjoint.hpp"
#include "mfchain/io.hpp"
#include "mfchain/meanfield.hpp"
#include "mfchain/parallel.hpp"
#include "mfchain/random.hpp"

namespace mfchain::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", digest[k]);
    hex += buf;
  }
  return hex;
}

ArtifactSet::ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactSet::write(const std::string& name, const std::string& content) {
  auto path = dir_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
}

void ArtifactSet::write_manifest(const std::string& command, const RunConfig& cfg) {
  json files = json::array();
  for (const auto& name : names_) {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    files.push_back({{"path", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  json manifest = {{"command", command}, {"problem", to_string(cfg.problem)}, {"seed", cfg.seed}, {"artifacts", files}};
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

namespace {

enum SeedTag : std::uint64_t { kSolve = 0, kMartingale, kDirect, kReweighted, kReference, kSimulate, kStationarity };

std::uint64_t sub_seed(const RunConfig& cfg, SeedTag tag) {
  return tag == kSolve ? cfg.seed : stream_seed(cfg.seed, tag);
}

struct Setup {
  ControlledChain model;
  InitialLaw law;
  TimeGrid grid;
  SchloglCounters counters;
};

InitialLaw two_state_law(const TwoStateSpec& s, double m0) {
  double pb = (m0 - s.a) / static_cast<double>(s.b - s.a);
  if (pb <= 0.0) return InitialLaw::point_mass(s.a);
  if (pb >= 1.0) return InitialLaw::point_mass(s.b);
  return {{s.a, s.b}, {1.0 - pb, pb}};
}

ControlledChain custom_model(const CustomSpec& c) {
  ControlledChain model;
  StateSpace space(c.states);
  std::vector<std::vector<double>> g = c.generator;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (j != i) off += g[i][j];
    g[i][i] = -off;
  }
  model.reference = validate_generator(g, space);
  auto ref = model.reference;
  auto sens = c.controlled;
  auto terminal = c.terminal;
  model.rate = [ref, sens, space](double, State i, State j, double, double v) {
    auto a = space.index_of(i);
    auto b = space.index_of(j);
    return ref.rate(a, b) + v * sens[a][b];
  };
  model.running = [](double, State, double, double v) { return 0.5 * v * v; };
  model.terminal = [terminal, space](State x, double) { return terminal[space.index_of(x)]; };
  model.controls = {0.0, c.control_max};
  return model;
}

Setup make_setup(const RunConfig& cfg) {
  Setup s;
  s.grid = TimeGrid(cfg.horizon, cfg.grid);
  switch (cfg.problem) {
    case Problem::Ex1:
      s.model = ex1_model(cfg.two_state);
      s.law = two_state_law(cfg.two_state, cfg.m0);
      break;
    case Problem::Ex2:
      s.model = ex2_model(cfg.two_state);
      s.law = two_state_law(cfg.two_state, cfg.m0);
      break;
    case Problem::Schlogl:
      s.model = ex3_model(cfg.schlogl, s.counters);
      s.law = InitialLaw::point_mass(cfg.schlogl.x0);
      break;
    case Problem::Custom:
      s.model = custom_model(cfg.custom);
      s.law = InitialLaw::point_mass(cfg.custom.x0);
      break;
  }
  s.law.validate(s.model.states());
  return s;
}

FixedPointConfig fixed_point_config(const RunConfig& cfg) {
  FixedPointConfig fp;
  fp.max_iters = cfg.max_iters;
  fp.damping = cfg.damping;
  fp.tol = cfg.tol;
  fp.n_paths = cfg.n_paths;
  return fp;
}

/// Control table plus the mean-field inputs and adjoint field that go with it.
struct Resolved {
  ControlTable table;
  std::optional<MeanCurve> mean;
  AdjointInputs inputs;
  AdjointField field;
  bool converged = true;
  std::size_t rounds = 0;
  double last_change = 0.0;
  std::string kind;
};

MarginalCurve two_state_marginals(const TwoStateSpec& spec, const MeanCurve& mu) {
  std::vector<double> probs;
  const double span = spec.b - spec.a;
  for (double m : mu.values()) {
    double pb = std::clamp((m - spec.a) / span, 0.0, 1.0);
    probs.push_back(1.0 - pb);
    probs.push_back(pb);
  }
  return MarginalCurve(mu.grid(), 2, probs);
}

void attach_marginals(const Setup& s, const MarginalCurve& marginals, AdjointInputs& inputs) {
  inputs.mean_f = marginals.expectation(s.model.states(), s.model.kappa_f, "kappa_f");
  inputs.mean_h = marginals.expectation(s.model.states(), s.model.kappa_h, "kappa_h").terminal();
  inputs.marginals = marginals;
}

/// Mean and marginals for a fixed table on the reference ensemble.
void fill_mean_inputs(const RunConfig& cfg, const Setup& s, Resolved& r, const PathEnsemble& ensemble) {
  if (!s.model.mean_coupled()) return;
  auto change = make_measure_change(s.model, r.table, std::nullopt);
  try {
    r.mean = solve_mean_fixed_point(change, s.model.kappa, ensemble, fixed_point_config(cfg), "kappa").curve;
  } catch (const NoConvergenceError& e) {
    r.mean = e.best().curve;
    r.converged = false;
  }
  change = make_measure_change(s.model, r.table, r.mean);
  r.inputs.mean = r.mean;
  attach_marginals(s, estimate_marginals(change, ensemble), r.inputs);
}

Resolved resolve_smp(const RunConfig& cfg, const Setup& s) {
  CoupledConfig cc;
  cc.fixed_point = fixed_point_config(cfg);
  cc.max_rounds = cfg.max_rounds;
  cc.tol = cfg.coupled_tol;
  cc.seed = sub_seed(cfg, kSolve);
  auto res = solve_coupled(s.model, s.law, s.grid, cc);
  Resolved r;
  r.kind = "smp";
  r.table = res.control;
  r.mean = res.mean;
  r.inputs = res.inputs;
  r.field = res.field;
  r.converged = res.converged;
  r.rounds = res.rounds;
  r.last_change = res.last_change;
  return r;
}

void solve_fixed_field(const Setup& s, Resolved& r) {
  const ControlTable table = r.table;
  r.inputs.control = [table](double t, State x) { return table(t, x); };
  r.field = solve_adjoint_ode(smp_driver(s.model, r.inputs), s.model.reference, s.grid);
}

Resolved resolve_control(const RunConfig& cfg, const Setup& s) {
  if (cfg.control.kind == ControlChoice::Kind::Smp) return resolve_smp(cfg, s);
  Resolved r;
  const auto& space = s.model.states();
  if (cfg.control.kind == ControlChoice::Kind::Constant) {
    r.kind = "constant";
    r.table = ControlTable::constant(s.grid, space, cfg.control.value);
  } else {
    r.kind = "closed_form";
    switch (cfg.problem) {
      case Problem::Ex1: {
        const auto spec = cfg.two_state;
        r.table = ControlTable::sample(s.grid, space, [spec](double, State x) { return spec.h(x) - spec.h_a; });
        break;
      }
      case Problem::Ex2: {
        const auto& spec = cfg.two_state;
        auto mu = riccati_curve(ex2_riccati_coeffs(spec.a, spec.b, spec.alpha, cfg.m0), s.grid, cfg.dt);
        r.table = ex2_control_table(spec, mu);
        r.mean = mu;
        r.inputs.mean = mu;
        attach_marginals(s, two_state_marginals(spec, mu), r.inputs);
        solve_fixed_field(s, r);
        return r;
      }
      case Problem::Schlogl:
        r.table = ControlTable::sample(s.grid, space, [](double, State x) { return x == 0 ? 0.0 : 1.0; });
        break;
      case Problem::Custom:
        throw ConfigError("problem custom has no closed-form control");
    }
  }
  if (s.model.mean_coupled()) {
    auto ensemble = simulate_reference(s.model.reference, s.law, s.grid.horizon(), cfg.n_paths,
                                       sub_seed(cfg, kSolve), 0);
    fill_mean_inputs(cfg, s, r, ensemble);
  }
  solve_fixed_field(s, r);
  return r;
}

void apply_shift(const RunConfig& cfg, const Setup& s, Resolved& r) {
  if (cfg.control_shift == 0.0) return;
  const auto& U = s.model.controls;
  for (std::size_t k = 0; k < r.table.grid().intervals(); ++k)
    for (std::size_t i = 0; i < r.table.states().size(); ++i) r.table.at(k, i) = U.clamp(r.table.at(k, i) + cfg.control_shift);
  if (s.model.mean_coupled() && r.kind != "closed_form") {
    auto ensemble = simulate_reference(s.model.reference, s.law, s.grid.horizon(), cfg.n_paths,
                                       sub_seed(cfg, kSolve), 0);
    AdjointInputs keep = r.inputs;
    fill_mean_inputs(cfg, s, r, ensemble);
    r.inputs.control = keep.control;
  }
}

std::string to_csv(const std::function<void(std::ostream&)>& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::string control_csv(const ControlTable& table) {
  std::ostringstream os;
  os << "t,state,u\n";
  for (std::size_t k = 0; k < table.grid().intervals(); ++k)
    for (std::size_t i = 0; i < table.states().size(); ++i)
      os << format_double(table.grid().time(k)) << ',' << table.states().value(i) << ','
         << format_double(table.at(k, i)) << '\n';
  return os.str();
}

json control_summary(const Resolved& r) {
  json states = json::array();
  const auto& t = r.table;
  for (std::size_t i = 0; i < t.states().size(); ++i) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = 0; k < t.grid().intervals(); ++k) {
      lo = std::min(lo, t.at(k, i));
      hi = std::max(hi, t.at(k, i));
    }
    states.push_back({{"state", t.states().value(i)}, {"min", lo}, {"max", hi}, {"at_t0", t.at(0, i)},
                      {"at_last_cell", t.at(t.grid().intervals() - 1, i)}});
  }
  return {{"control", r.kind}, {"rounds", r.rounds}, {"converged", r.converged}, {"last_change", r.last_change},
          {"states", states}};
}

void write_json(ArtifactSet& out, const std::string& name, const json& j) { out.write(name, j.dump(2) + "\n"); }

MeasureChange measure_change(const Setup& s, const Resolved& r) { return make_measure_change(s.model, r.table, r.mean); }

json closed_form_deltas(const RunConfig& cfg, const Setup& s, const Resolved& r) {
  const auto& t = r.table;
  const auto& space = t.states();
  json d = json::object();
  auto control_delta = [&](const std::function<double(std::size_t k, State x)>& expected) {
    double worst = 0.0;
    for (std::size_t k = 0; k < t.grid().intervals(); ++k)
      for (std::size_t i = 0; i < space.size(); ++i)
        worst = std::max(worst, std::abs(t.at(k, i) - expected(k, space.value(i))));
    return worst;
  };
  switch (cfg.problem) {
    case Problem::Ex1: {
      const auto& spec = cfg.two_state;
      d["control_vs_closed_form"] = control_delta([&](std::size_t, State x) { return spec.h(x) - spec.h_a; });
      auto [qab, qba] = ex1_adjoint_closed_form(spec);
      double worst = 0.0;
      for (std::size_t k = 0; k < r.field.grid().points(); ++k)
        worst = std::max({worst, std::abs(r.field.q(k, 0, 1) - qab), std::abs(r.field.q(k, 1, 0) - qba)});
      d["q_vs_closed_form"] = worst;
      break;
    }
    case Problem::Ex2: {
      const auto& spec = cfg.two_state;
      auto riccati = riccati_curve(ex2_riccati_coeffs(spec.a, spec.b, spec.alpha, cfg.m0), s.grid, cfg.dt);
      if (r.mean) d["mean_vs_riccati"] = sup_distance(*r.mean, riccati);
      const double a = spec.a, b = spec.b;
      d["control_vs_closed_form"] = control_delta([&](std::size_t k, State x) {
        double m = r.mean ? r.mean->value(k) : riccati.value(k);
        return x == spec.b ? std::max(0.0, (b * b - a * a) + 2.0 * m * (a - b)) : 0.0;
      });
      break;
    }
    case Problem::Schlogl:
      d["control_vs_closed_form"] = control_delta([](std::size_t, State x) { return x == 0 ? 0.0 : 1.0; });
      break;
    case Problem::Custom:
      break;
  }
  return d;
}

json check_entry(bool pass, json detail) {
  detail["pass"] = pass;
  return detail;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, ArtifactSet& out, std::ostream& log) {
  auto s = make_setup(cfg);
  Resolved r;
  if (cfg.problem == Problem::Custom && cfg.control.kind != ControlChoice::Kind::Constant) {
    r.table = ControlTable::constant(s.grid, s.model.states(), 0.0);
    r.kind = "constant";
  } else {
    r = resolve_control(cfg, s);
  }
  apply_shift(cfg, s, r);
  auto change = measure_change(s, r);
  auto ensemble = simulate_paths(change.intensity, change.mean_ptr(), change.control, s.law, cfg.horizon,
                                 cfg.n_paths, sub_seed(cfg, kSimulate), 0);
  std::vector<double> terminal, jumps;
  std::map<State, std::size_t> histogram;
  for (const auto& p : ensemble.paths) {
    terminal.push_back(p.terminal());
    jumps.push_back(static_cast<double>(p.jumps()));
    ++histogram[p.terminal()];
  }
  auto mt = sample_moments(terminal);
  auto mj = sample_moments(jumps);
  json dist = json::object();
  for (const auto& [state, n] : histogram)
    dist[std::to_string(state)] = static_cast<double>(n) / static_cast<double>(ensemble.size());
  json summary = {{"n_paths", ensemble.size()},
                  {"control", r.kind},
                  {"mean_terminal_state", mt.mean},
                  {"se_terminal_state", mt.standard_error},
                  {"mean_jumps", mj.mean},
                  {"se_jumps", mj.standard_error},
                  {"terminal_distribution", dist}};
  if (cfg.problem == Problem::Schlogl)
    summary["schlogl_counters"] = {{"floor_hits", s.counters.floor_hits->load()},
                                   {"truncations", s.counters.truncations->load()}};
  write_json(out, "simulate_summary.json", summary);
  const std::size_t written = std::min(cfg.paths_to_write, ensemble.size());
  for (std::size_t k = 0; k < written; ++k) {
    char name[48];
    std::snprintf(name, sizeof name, "paths/path_%06zu.csv", k);
    out.write(name, to_csv([&](std::ostream& os) { write_path_csv(os, ensemble.paths[k]); }));
  }
  log << "simulated " << ensemble.size() << " paths; mean x(T) " << mt.mean << " +- " << mt.standard_error << '\n';
  return 0;
}

int cmd_validate(const RunConfig& cfg, ArtifactSet& out, std::ostream& log) {
  auto s = make_setup(cfg);
  auto r = resolve_control(cfg, s);
  apply_shift(cfg, s, r);
  auto change = measure_change(s, r);
  json checks = json::object();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, json detail) {
    checks[name] = check_entry(pass, std::move(detail));
    all = all && pass;
    log << name << ": " << (pass ? "pass" : "FAIL") << '\n';
  };

  auto mart = martingale_checks(change, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kMartingale));
  record("martingale", mart.all_pass(), to_json(mart));

  auto ref = simulate_reference(s.model.reference, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kReference), 0);
  long residual_paths = 0;
  std::vector<double> qv, dyn;
  for (const auto& p : ref.paths) {
    if (path_statistics(p).representation_residual != 0) ++residual_paths;
    auto v = optional_variation(p, s.model.reference);
    qv.push_back(v.optional - v.predictable);
    dyn.push_back(dynkin_residual(p, s.model.reference, identity_function()));
  }
  record("representation_residual", residual_paths == 0, {{"nonzero_paths", residual_paths}});
  auto mq = sample_moments(qv);
  record("quadratic_variation", std::abs(mq.mean) <= 3.0 * mq.standard_error,
         {{"mean", mq.mean}, {"se", mq.standard_error}});
  auto md = sample_moments(dyn);
  record("dynkin_identity", std::abs(md.mean) <= 3.0 * md.standard_error,
         {{"mean", md.mean}, {"se", md.standard_error}});

  auto cost = make_cost(s.model);
  auto direct = estimate_cost_direct(cost, change, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kDirect));
  auto reweighted =
      estimate_cost_reweighted(cost, change, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kReweighted));
  double combined = std::hypot(direct.standard_error, reweighted.standard_error);
  record("cost_estimators", std::abs(direct.value - reweighted.value) <= 3.0 * combined,
         {{"direct", to_json(direct)}, {"reweighted", to_json(reweighted)}});

  auto paths = simulate_reference(s.model.reference, s.law, cfg.horizon, std::min<std::size_t>(cfg.n_paths, 1000),
                                  sub_seed(cfg, kStationarity), 0);
  auto stat = check_stationarity(s.model, r.field, r.inputs, r.table.as_control(), paths.paths, cfg.stationarity_tol);
  record("stationarity", stat.violations == 0, to_json(stat));

  json report = {{"problem", to_string(cfg.problem)},
                 {"control", r.kind},
                 {"control_shift", cfg.control_shift},
                 {"n_paths", cfg.n_paths},
                 {"all_pass", all},
                 {"checks", checks}};
  write_json(out, "validate.json", report);
  return all ? 0 : 1;
}

int cmd_riccati_table(const RunConfig& cfg, ArtifactSet& out, std::ostream& log) {
  auto rows = riccati_table(cfg.riccati_cases(), cfg.dt, cfg.t_max);
  auto csv = to_csv([&](std::ostream& os) { write_riccati_table_csv(os, rows); });
  out.write("riccati_table.csv", csv);
  log << csv;
  return 0;
}

int cmd_solve(const RunConfig& cfg, ArtifactSet& out, std::ostream& log) {
  auto s = make_setup(cfg);
  auto r = resolve_smp(cfg, s);
  if (r.mean) out.write("mean.csv", to_csv([&](std::ostream& os) { write_mean_curve_csv(os, *r.mean); }));
  out.write("adjoint.csv", to_csv([&](std::ostream& os) { write_adjoint_csv(os, r.field); }));
  out.write("control.csv", control_csv(r.table));
  write_json(out, "control_summary.json", control_summary(r));
  if (cfg.problem != Problem::Custom) write_json(out, "closed_form_deltas.json", closed_form_deltas(cfg, s, r));
  log << "solve: " << r.rounds << " round(s), last change " << r.last_change
      << (r.converged ? ", converged" : ", NOT converged") << '\n';
  return r.converged ? 0 : 1;
}

int cmd_cost(const RunConfig& cfg, ArtifactSet& out, std::ostream& log) {
  auto s = make_setup(cfg);
  auto r = resolve_control(cfg, s);
  apply_shift(cfg, s, r);
  auto change = measure_change(s, r);
  auto cost = make_cost(s.model);
  auto direct = estimate_cost_direct(cost, change, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kDirect));
  auto reweighted =
      estimate_cost_reweighted(cost, change, s.law, cfg.horizon, cfg.n_paths, sub_seed(cfg, kReweighted));
  double combined = std::hypot(direct.standard_error, reweighted.standard_error);
  json report = {{"problem", to_string(cfg.problem)},
                 {"control", r.kind},
                 {"direct", to_json(direct)},
                 {"reweighted", to_json(reweighted)},
                 {"agree_within_3se", std::abs(direct.value - reweighted.value) <= 3.0 * combined}};
  write_json(out, "cost.json", report);
  log << "J direct " << direct.value << " +- " << direct.standard_error << ", reweighted " << reweighted.value
      << " +- " << reweighted.standard_error << '\n';
  return 0;
}

}  // namespace mfchain::cli
