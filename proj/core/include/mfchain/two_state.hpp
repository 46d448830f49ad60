#pragma once

#include <utility>

#include "mfchain/chain.hpp"
#include "mfchain/mean_curve.hpp"
#include "mfchain/model.hpp"

namespace mfchain {

/// Two-state chain on {a, b}: a -> b at rate alpha, b -> a at the
/// controlled rate. Terminal cost h(a), h(b) for the linear-quadratic
/// problem; the reference generator has rates g_ab, g_ba.
struct TwoStateSpec {
  State a = 0;
  State b = 1;
  double alpha = 0.5;
  double h_a = 0.0;
  double h_b = 1.0;
  double g_ab = 1.0;
  double g_ba = 1.0;
  double control_max = 1e6;

  /// Throws InvalidArgument unless 0 <= a < b, alpha > 0, g_ab, g_ba > 0 and
  /// h(b) >= h(a).
  void validate() const;
  double h(State x) const { return x == b ? h_b : h_a; }
  StateSpace states() const { return StateSpace({a, b}); }
};

GeneratorMatrix two_state_reference(const TwoStateSpec& spec);

/// lambda_ab = alpha, lambda_ba = v; cost 1/2 v^2 dt + h(x(T)).
ControlledChain ex1_model(const TwoStateSpec& spec);

/// h(x(t^-)) - h(a)
double ex1_optimal_control(const TwoStateSpec& spec, const PathPrefix& prefix, double t);
Control ex1_control(const TwoStateSpec& spec);

/// (q_ab, q_ba) = (h(a) - h(b), h(b) - h(a))
std::pair<double, double> ex1_adjoint_closed_form(const TwoStateSpec& spec);

/// lambda_ab = alpha, lambda_ba = v + E[x(t^-)]; cost 1/2 v^2 dt plus the
/// variance of x(T), i.e. terminal (x - E[x(T)])^2. h_a, h_b are unused.
ControlledChain ex2_model(const TwoStateSpec& spec);

/// ((b^2 - a^2) + 2 mu(t^-) (a - b)) I_b(t^-)
double ex2_optimal_control(const TwoStateSpec& spec, const MeanCurve& mu, const PathPrefix& prefix, double t);
Control ex2_control(const TwoStateSpec& spec, const MeanCurve& mu);

/// Feedback table of the Example-2 closed form on mu's grid, using the
/// left value mu(t_k^-) on cell k.
ControlTable ex2_control_table(const TwoStateSpec& spec, const MeanCurve& mu);

}  // namespace mfchain
