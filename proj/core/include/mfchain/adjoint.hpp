#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/mean_curve.hpp"
#include "mfchain/meanfield.hpp"
#include "mfchain/model.hpp"

namespace mfchain {

/// <m, n>_g at state index i: sum_{j != i} m_ij n_ij g_ij. m and n are the
/// rows out of i.
double g_inner(std::span<const double> m, std::span<const double> n, const GeneratorMatrix& g, std::size_t i);

/// Expectations under the controlled law that enter the adjoint driver:
/// rate_term = E[L <ell_m, q>_g] and running_term = E[L f_m], where the
/// subscript m is the derivative in the mean argument.
struct MeanTerms {
  double rate_term = 0.0;
  double running_term = 0.0;
};

/// Backward equation dp = -F(t, x, q) dt + q dM on the state space, with
/// p(t) = phi(t, x(t)) and q_ij = phi_j - phi_i.
struct DriverSpec {
  /// Empty means zero mean terms.
  std::function<MeanTerms(double t, std::span<const double> phi)> mean_terms;
  /// F_i(t, q_i., mean terms)
  std::function<double(double t, std::size_t i, std::span<const double> q_row, const MeanTerms&)> driver;
  std::function<double(std::size_t i)> terminal;
};

/// phi(t_k, i) on a grid, stored with ascending times.
class AdjointField {
 public:
  AdjointField() = default;
  AdjointField(TimeGrid grid, StateSpace states, std::vector<double> phi);

  const TimeGrid& grid() const noexcept { return grid_; }
  const StateSpace& states() const noexcept { return states_; }
  double phi(std::size_t k, std::size_t i) const { return phi_[k * states_.size() + i]; }
  std::span<const double> row(std::size_t k) const { return {phi_.data() + k * states_.size(), states_.size()}; }
  /// q_ij(t_k) = phi(t_k, j) - phi(t_k, i)
  double q(std::size_t k, std::size_t i, std::size_t j) const { return phi(k, j) - phi(k, i); }
  void q_row(std::size_t k, std::size_t i, std::span<double> out) const;
  /// p(t_k) = phi(t_k, x)
  double p(std::size_t k, State x) const { return phi(k, states_.index_of(x)); }

 private:
  TimeGrid grid_;
  StateSpace states_;
  std::vector<double> phi_;
};

class NonFiniteFieldError : public Error {
 public:
  NonFiniteFieldError(const std::string& what, double time) : Error(ErrorKind::NonFiniteField, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Classical RK4 backward from phi(T, .) = terminal, step = grid spacing.
/// Because q dM is compensated under the reference measure
/// (dM_ij = dN_ij - I_i g_ij dt), the state-indexed reduction of
/// dp = -F dt + q dM is dphi_i/dt = -(F_i + sum_j g_ij q_ij).
/// Throws NonFiniteFieldError with the first time at which phi is not finite.
AdjointField solve_adjoint_ode(const DriverSpec& spec, const GeneratorMatrix& g, const TimeGrid& grid);

/// L (<ell(v), q>_g - f(v)) at state index i.
double hamiltonian_value(const ControlledChain& model, double t, std::size_t i, double v, double weight,
                         std::span<const double> q_row, double mean, double mean_f);

struct HamiltonianMax {
  double control = 0.0;
  double value = 0.0;
  /// The unconstrained maximizer made a rate negative; the result was
  /// restricted to controls with nonnegative rates.
  bool projected = false;
};

/// Maximizer of a scalar function over U. Exact quadratics are detected and
/// solved in closed form (clipped vertex when concave, better endpoint
/// otherwise); anything else gets a 257-point scan refined by golden-section
/// search to 1e-10. Ties go to the smallest maximizer.
HamiltonianMax maximize_scalar(const std::function<double(double)>& fn, const ControlSet& U);

HamiltonianMax maximize_hamiltonian(const ControlledChain& model, double t, std::size_t i,
                                    std::span<const double> q_row, double mean, double mean_f);

/// Mean-field inputs of the backward sweep: curves of E[kappa], E[kappa_f],
/// the terminal mean E[kappa_h(x(T))], and the marginal law (needed when the
/// model is mean-coupled). `control` fixes u(t, i); when empty the control is
/// the pointwise Hamiltonian maximizer.
struct AdjointInputs {
  std::optional<MeanCurve> mean;
  std::optional<MeanCurve> mean_f;
  double mean_h = 0.0;
  std::optional<MarginalCurve> marginals;
  std::function<double(double t, State i)> control;
};

/// Driver of the first-order adjoint equation for `model`:
/// F_i = <ell, q>_g - f + kappa(i) E[L <ell_m, q>_g] - kappa_f(i) E[L f_m],
/// terminal phi(T, i) = -h(i, m_h) - kappa_h(i) E[L h_m(T)].
DriverSpec smp_driver(const ControlledChain& model, const AdjointInputs& inputs);

struct StationarityReport {
  double max_abs_derivative = 0.0;
  double fraction_within = 1.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double tolerance = 0.0;
  double scale = 1.0;
  std::map<State, std::size_t> samples_by_state;
  std::map<State, std::size_t> violations_by_state;
};

/// Evaluates dH/dv at the applied control along each path at the grid times
/// t_k (k < K), state x(t_k^-), by central differences with step
/// 1e-6 max(1, |u|) (one-sided at the bounds of U, where only the projected
/// gradient counts). A sample passes when |dH/dv| <= tol * scale with
/// scale = max(1, max |q|).
StationarityReport check_stationarity(const ControlledChain& model, const AdjointField& field,
                                      const AdjointInputs& inputs, const Control& control,
                                      const std::vector<JumpPath>& paths, double tol = 1e-6);

struct CoupledConfig {
  FixedPointConfig fixed_point{50, 0.5, 0.02, 100000, 3.0};
  std::size_t max_rounds = 50;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  std::optional<ControlTable> initial;
};

struct CoupledResult {
  ControlTable control;
  std::optional<MeanCurve> mean;
  std::optional<MarginalCurve> marginals;
  AdjointInputs inputs;
  AdjointField field;
  std::size_t rounds = 0;
  double last_change = 0.0;
  bool converged = false;
};

/// Forward-backward loop: mean fixed point under the current feedback table
/// (one reference ensemble reused throughout), marginals, backward sweep with
/// pointwise Hamiltonian maximization, new table from the field at t_k.
/// Stops when the table moves by at most cfg.tol in sup norm. Mean-free
/// models need a single sweep.
CoupledResult solve_coupled(const ControlledChain& model, const InitialLaw& law, const TimeGrid& grid,
                            const CoupledConfig& cfg, unsigned threads = 0);

/// Table u(t_k, i) = argmax H at (t_k, i) from a field and its inputs.
ControlTable control_from_field(const ControlledChain& model, const AdjointField& field, const AdjointInputs& inputs);

}  // namespace mfchain
