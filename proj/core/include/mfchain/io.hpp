#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfchain/adjoint.hpp"
#include "mfchain/chain.hpp"
#include "mfchain/cost.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/mean_curve.hpp"
#include "mfchain/riccati.hpp"

namespace mfchain {

/// Shortest round-trip text with 17 significant digits; "inf" for +inf.
std::string format_double(double v);
/// Fewest significant digits that read back to the same double; integers
/// keep a trailing ".0".
std::string format_shortest(double v);

/// `time,state` with a first row `0.0,x0` and one row per event.
void write_path_csv(std::ostream& out, const JumpPath& path);
/// Inverse of write_path_csv; throws ParseError on malformed input.
JumpPath read_path_csv(std::istream& in, double horizon);

/// `t,mu`, one row per grid point.
void write_mean_curve_csv(std::ostream& out, const MeanCurve& curve);
/// `t,state,phi`, rows by time then state.
void write_adjoint_csv(std::ostream& out, const AdjointField& field);
/// `a,b,alpha,m0,exit_time` with `inf` when there is no exit.
void write_riccati_table_csv(std::ostream& out, const std::vector<RiccatiRow>& rows);

nlohmann::json to_json(const MartingaleReport& report);
nlohmann::json to_json(const CostEstimate& estimate);
nlohmann::json to_json(const StationarityReport& report);
nlohmann::json to_json(const ProbeReport& report);

}  // namespace mfchain
