#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfchain/riccati.hpp"
#include "mfchain/schlogl.hpp"
#include "mfchain/two_state.hpp"

namespace mfchain::cli {

/// Malformed or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Problem { Ex1, Ex2, Schlogl, Custom };
const char* to_string(Problem p) noexcept;

/// Which control drives simulate, validate and cost: the Hamiltonian
/// maximizer from the coupled solve, the closed form of the example, or a
/// constant.
struct ControlChoice {
  enum class Kind { Smp, ClosedForm, Constant } kind = Kind::Smp;
  double value = 0.0;
};

/// Chain given by a reference generator, a matrix of control sensitivities
/// (lambda = g + v c) and a terminal cost per state; running cost v^2 / 2.
struct CustomSpec {
  std::vector<State> states;
  std::vector<std::vector<double>> generator;
  std::vector<std::vector<double>> controlled;
  std::vector<double> terminal;
  State x0 = 0;
  double control_max = 1e6;
};

struct RiccatiBlock {
  State a = 0;
  State b = 1;
  std::vector<double> alpha;
  std::vector<double> m0;
};

struct RunConfig {
  Problem problem = Problem::Ex1;
  std::uint64_t seed = 42;
  double horizon = 1.0;
  std::size_t grid = 256;
  std::size_t n_paths = 100000;
  std::size_t paths_to_write = 10;
  double dt = 1e-4;
  double t_max = 100.0;
  double damping = 0.5;
  double tol = 0.02;
  std::size_t max_iters = 50;
  double coupled_tol = 1e-3;
  std::size_t max_rounds = 50;
  double stationarity_tol = 1e-6;
  double control_shift = 0.0;
  ControlChoice control;
  TwoStateSpec two_state;
  double m0 = 0.0;
  SchloglSpec schlogl;
  CustomSpec custom;
  std::vector<RiccatiBlock> riccati;

  std::vector<RiccatiCase> riccati_cases() const;
};

/// Parses and range-checks a config document; unknown keys are errors.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace mfchain::cli
