#include "mfchain/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfchain {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string format_shortest(double v) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[40];
  std::string s(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_path_csv(std::ostream& out, const JumpPath& path) {
  out << "time,state\n";
  out << "0.0," << path.initial() << '\n';
  for (const auto& e : path.events()) out << format_double(e.time) << ',' << e.to << '\n';
}

JumpPath read_path_csv(std::istream& in, double horizon) {
  std::string line;
  if (!std::getline(in, line) || line != "time,state") throw Error(ErrorKind::ParseError, "missing `time,state` header");
  std::vector<JumpEvent> events;
  State x0 = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, "bad path row: " + line);
    double t;
    long s;
    try {
      std::size_t used = 0;
      t = std::stod(line.substr(0, comma), &used);
      s = std::stol(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad path row: " + line);
    }
    if (first) {
      if (t != 0.0) throw Error(ErrorKind::ParseError, "first path row must be at time 0");
      x0 = static_cast<State>(s);
      first = false;
    } else {
      events.push_back({t, static_cast<State>(s)});
    }
  }
  if (first) throw Error(ErrorKind::ParseError, "path has no initial row");
  return JumpPath(x0, std::move(events), horizon);
}

void write_mean_curve_csv(std::ostream& out, const MeanCurve& curve) {
  out << "t,mu\n";
  for (std::size_t k = 0; k < curve.grid().points(); ++k)
    out << format_double(curve.grid().time(k)) << ',' << format_double(curve.value(k)) << '\n';
}

void write_adjoint_csv(std::ostream& out, const AdjointField& field) {
  out << "t,state,phi\n";
  for (std::size_t k = 0; k < field.grid().points(); ++k)
    for (std::size_t i = 0; i < field.states().size(); ++i)
      out << format_double(field.grid().time(k)) << ',' << field.states().value(i) << ','
          << format_double(field.phi(k, i)) << '\n';
}

void write_riccati_table_csv(std::ostream& out, const std::vector<RiccatiRow>& rows) {
  out << "a,b,alpha,m0,exit_time\n";
  for (const auto& r : rows) {
    out << r.params.a << ',' << r.params.b << ',' << format_shortest(r.params.alpha) << ','
        << format_shortest(r.params.m0) << ','
        << (r.exit_time ? format_double(*r.exit_time) : std::string("inf")) << '\n';
  }
}

nlohmann::json to_json(const MartingaleReport& report) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : report.per_edge)
    edges.push_back({{"i", e.i}, {"j", e.j}, {"mean", e.mean}, {"se", e.se}, {"pass", e.pass}});
  return {{"mean_L", report.mean_L}, {"se_L", report.se_L}, {"pass_L", report.pass_L}, {"per_edge", edges}};
}

nlohmann::json to_json(const CostEstimate& estimate) {
  return {{"value", estimate.value},
          {"se", estimate.standard_error},
          {"n_paths", estimate.n_paths},
          {"estimator", to_string(estimate.estimator)}};
}

nlohmann::json to_json(const StationarityReport& report) {
  nlohmann::json by_state = nlohmann::json::object();
  for (const auto& [state, count] : report.samples_by_state) {
    auto it = report.violations_by_state.find(state);
    by_state[std::to_string(state)] = {{"samples", count},
                                       {"violations", it == report.violations_by_state.end() ? 0 : it->second}};
  }
  return {{"max_abs_derivative", report.max_abs_derivative},
          {"fraction_within", report.fraction_within},
          {"samples", report.samples},
          {"violations", report.violations},
          {"tolerance", report.tolerance},
          {"scale", report.scale},
          {"by_state", by_state}};
}

nlohmann::json to_json(const ProbeReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries)
    entries.push_back(
        {{"direction", e.label}, {"difference", e.difference}, {"se", e.se}, {"non_improving", e.non_improving}});
  return {{"base_value", report.base_value},
          {"fraction_non_improving", report.fraction_non_improving},
          {"entries", entries}};
}

}  // namespace mfchain
