#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace mfchain::cli {

const char* to_string(Problem p) noexcept {
  switch (p) {
    case Problem::Ex1: return "ex1";
    case Problem::Ex2: return "ex2";
    case Problem::Schlogl: return "schlogl";
    case Problem::Custom: return "custom";
  }
  return "?";
}

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

long integer(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<long>();
}

std::size_t count(const json& j, const std::string& key, const std::string& where, std::size_t min) {
  long v = integer(j, key, where);
  if (v < static_cast<long>(min)) throw ConfigError(where + "." + key + " must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

std::vector<double> number_list(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be a matrix");
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < v.size(); ++r) {
    json row = json::object({{"row", v[r]}});
    out.push_back(number_list(row, "row", where + "." + key));
  }
  return out;
}

void parse_two_state(const json& j, RunConfig& cfg) {
  const std::string where = "two_state";
  require_object(j, where);
  reject_unknown(j, {"a", "b", "alpha", "h_a", "h_b", "g_ab", "g_ba", "m0", "control_max"}, where);
  auto& s = cfg.two_state;
  if (j.contains("a")) s.a = static_cast<State>(integer(j, "a", where));
  if (j.contains("b")) s.b = static_cast<State>(integer(j, "b", where));
  if (j.contains("alpha")) s.alpha = number(j, "alpha", where);
  if (j.contains("h_a")) s.h_a = number(j, "h_a", where);
  if (j.contains("h_b")) s.h_b = number(j, "h_b", where);
  if (j.contains("g_ab")) s.g_ab = number(j, "g_ab", where);
  if (j.contains("g_ba")) s.g_ba = number(j, "g_ba", where);
  if (j.contains("control_max")) s.control_max = number(j, "control_max", where);
  cfg.m0 = j.contains("m0") ? number(j, "m0", where) : static_cast<double>(s.a);
}

void parse_schlogl(const json& j, RunConfig& cfg) {
  const std::string where = "schlogl";
  require_object(j, where);
  reject_unknown(j, {"n_max", "beta", "birth", "reference_death", "x0", "control_max", "base_rates"}, where);
  auto& s = cfg.schlogl;
  if (j.contains("n_max")) s.n_max = static_cast<int>(integer(j, "n_max", where));
  if (j.contains("beta")) s.beta = number(j, "beta", where);
  if (j.contains("birth")) s.birth = number(j, "birth", where);
  if (j.contains("reference_death")) s.reference_death = number(j, "reference_death", where);
  if (j.contains("x0")) s.x0 = static_cast<State>(integer(j, "x0", where));
  if (j.contains("control_max")) s.control_max = number(j, "control_max", where);
  if (j.contains("base_rates")) s.base_rates = matrix(j, "base_rates", where);
}

void parse_custom(const json& j, RunConfig& cfg) {
  const std::string where = "custom";
  require_object(j, where);
  reject_unknown(j, {"states", "generator", "controlled", "terminal", "x0", "control_max"}, where);
  auto& c = cfg.custom;
  for (const char* key : {"states", "generator", "terminal", "x0"})
    if (!j.contains(key)) throw ConfigError(std::string("custom.") + key + " is required");
  for (double s : number_list(j, "states", where)) {
    if (s != std::floor(s) || s < 0) throw ConfigError("custom.states must be nonnegative integers");
    c.states.push_back(static_cast<State>(s));
  }
  c.generator = matrix(j, "generator", where);
  c.controlled = j.contains("controlled") ? matrix(j, "controlled", where)
                                          : std::vector<std::vector<double>>(c.states.size(),
                                                                             std::vector<double>(c.states.size(), 0.0));
  c.terminal = number_list(j, "terminal", where);
  c.x0 = static_cast<State>(integer(j, "x0", where));
  if (j.contains("control_max")) c.control_max = number(j, "control_max", where);
  const auto n = c.states.size();
  auto square = [n](const std::vector<std::vector<double>>& m) {
    if (m.size() != n) return false;
    for (const auto& row : m)
      if (row.size() != n) return false;
    return true;
  };
  if (!square(c.generator)) throw ConfigError("custom.generator must be square over custom.states");
  if (!square(c.controlled)) throw ConfigError("custom.controlled must be square over custom.states");
  if (c.terminal.size() != n) throw ConfigError("custom.terminal needs one value per state");
  for (const auto& row : c.controlled)
    for (double v : row)
      if (v < 0.0) throw ConfigError("custom.controlled entries must be >= 0");
}

void parse_riccati(const json& j, RunConfig& cfg) {
  if (!j.is_array()) throw ConfigError("riccati must be an array of blocks");
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = "riccati[" + std::to_string(k) + "]";
    const auto& blk = j[k];
    require_object(blk, where);
    reject_unknown(blk, {"a", "b", "alpha", "m0"}, where);
    for (const char* key : {"a", "b", "alpha", "m0"})
      if (!blk.contains(key)) throw ConfigError(where + "." + key + " is required");
    RiccatiBlock b;
    b.a = static_cast<State>(integer(blk, "a", where));
    b.b = static_cast<State>(integer(blk, "b", where));
    if (!(b.a >= 0 && b.a < b.b)) throw ConfigError(where + " needs 0 <= a < b");
    b.alpha = number_list(blk, "alpha", where);
    b.m0 = number_list(blk, "m0", where);
    for (double a : b.alpha)
      if (!(a > 0.0)) throw ConfigError(where + ".alpha entries must be > 0");
    cfg.riccati.push_back(std::move(b));
  }
}

ControlChoice parse_control(const json& j) {
  ControlChoice c;
  if (j.is_number()) {
    c.kind = ControlChoice::Kind::Constant;
    c.value = j.get<double>();
    if (!(c.value >= 0.0)) throw ConfigError("a constant control must be >= 0");
  } else if (j == "smp") {
    c.kind = ControlChoice::Kind::Smp;
  } else if (j == "closed_form") {
    c.kind = ControlChoice::Kind::ClosedForm;
  } else {
    throw ConfigError("control must be \"smp\", \"closed_form\" or a number");
  }
  return c;
}

}  // namespace

std::vector<RiccatiCase> RunConfig::riccati_cases() const {
  std::vector<RiccatiCase> out;
  for (const auto& blk : riccati)
    for (double a : blk.alpha)
      for (double m : blk.m0) out.push_back({blk.a, blk.b, a, m});
  return out;
}

RunConfig parse_config(const json& doc) {
  const std::string where = "config";
  require_object(doc, where);
  reject_unknown(doc,
                 {"problem", "seed", "horizon", "grid", "n_paths", "paths_to_write", "dt", "t_max", "damping", "tol",
                  "max_iters", "coupled_tol", "max_rounds", "stationarity_tol", "control_shift", "control",
                  "two_state", "schlogl", "custom", "riccati"},
                 where);
  RunConfig cfg;
  try {
    if (doc.contains("problem")) {
      const auto& p = doc.at("problem");
      if (p == "ex1") cfg.problem = Problem::Ex1;
      else if (p == "ex2") cfg.problem = Problem::Ex2;
      else if (p == "schlogl") cfg.problem = Problem::Schlogl;
      else if (p == "custom") cfg.problem = Problem::Custom;
      else throw ConfigError("problem must be one of ex1, ex2, schlogl, custom");
    }
    if (doc.contains("seed")) {
      const auto& s = doc.at("seed");
      if (!s.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
      cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("horizon")) cfg.horizon = number(doc, "horizon", where);
    if (doc.contains("grid")) cfg.grid = count(doc, "grid", where, 1);
    if (doc.contains("n_paths")) cfg.n_paths = count(doc, "n_paths", where, 2);
    if (doc.contains("paths_to_write")) cfg.paths_to_write = count(doc, "paths_to_write", where, 0);
    if (doc.contains("dt")) cfg.dt = number(doc, "dt", where);
    if (doc.contains("t_max")) cfg.t_max = number(doc, "t_max", where);
    if (doc.contains("damping")) cfg.damping = number(doc, "damping", where);
    if (doc.contains("tol")) cfg.tol = number(doc, "tol", where);
    if (doc.contains("max_iters")) cfg.max_iters = count(doc, "max_iters", where, 1);
    if (doc.contains("coupled_tol")) cfg.coupled_tol = number(doc, "coupled_tol", where);
    if (doc.contains("max_rounds")) cfg.max_rounds = count(doc, "max_rounds", where, 1);
    if (doc.contains("stationarity_tol")) cfg.stationarity_tol = number(doc, "stationarity_tol", where);
    if (doc.contains("control_shift")) cfg.control_shift = number(doc, "control_shift", where);
    if (doc.contains("control")) cfg.control = parse_control(doc.at("control"));
    if (doc.contains("two_state")) parse_two_state(doc.at("two_state"), cfg);
    if (doc.contains("schlogl")) parse_schlogl(doc.at("schlogl"), cfg);
    if (doc.contains("custom")) parse_custom(doc.at("custom"), cfg);
    if (doc.contains("riccati")) parse_riccati(doc.at("riccati"), cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }

  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(cfg.t_max >= 0.0)) throw ConfigError("t_max must be >= 0");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (!(cfg.coupled_tol > 0.0)) throw ConfigError("coupled_tol must be > 0");
  if (!(cfg.stationarity_tol > 0.0)) throw ConfigError("stationarity_tol must be > 0");
  if (cfg.problem == Problem::Custom && cfg.custom.states.empty())
    throw ConfigError("problem custom needs a custom block");
  try {
    cfg.two_state.validate();
    cfg.schlogl.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto& s = cfg.two_state;
  if (!(cfg.m0 >= s.a && cfg.m0 <= s.b)) throw ConfigError("two_state.m0 must lie in [a, b]");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace mfchain::cli
