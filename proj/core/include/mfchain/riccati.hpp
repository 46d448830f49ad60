#pragma once

#include <optional>
#include <vector>

#include "mfchain/mean_curve.hpp"
#include "mfchain/types.hpp"

namespace mfchain {

/// mu' = A mu^2 + B mu + C, mu(0) = m0, constrained to
/// lower_level <= mu <= exit_level.
struct RiccatiParams {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double m0 = 0.0;
  double exit_level = 0.0;
  double lower_level = 0.0;

  double rhs(double mu) const noexcept { return (A * mu + B) * mu + C; }
};

/// Coefficients of the two-state mean equation: A = 2(b - a) - 1,
/// B = 3a^2 + a(1 - 2b) - b^2, C = alpha b + a(b^2 - a^2), band [0, (a+b)/2].
RiccatiParams ex2_riccati_coeffs(State a, State b, double alpha, double m0 = 0.0);

struct RiccatiSolution {
  /// RK4 nodes k dt up to the last node inside the band.
  std::vector<double> times;
  std::vector<double> values;
  std::optional<double> exit_time;

  /// The nodes as a MeanCurve (needs at least two nodes).
  MeanCurve as_curve() const;
};

class NonFiniteStateError : public Error {
 public:
  NonFiniteStateError(const std::string& what, double last_valid_time)
      : Error(ErrorKind::NonFiniteState, what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Classical RK4 with step dt until the solution leaves the band or t_max is
/// reached. The first crossing is located by bisection to 1e-6 on the cubic
/// Hermite interpolant of the step that crossed. With keep_trajectory false
/// only the exit time is produced.
RiccatiSolution solve_constrained_riccati(const RiccatiParams& params, double dt = 1e-4, double t_max = 100.0,
                                          bool keep_trajectory = true);

/// Exit time from the integral of 1 / (A mu^2 + B mu + C) between m0 and
/// the level the solution moves towards: arctan form for a negative
/// discriminant, partial fractions for a positive one, rational form at a
/// double root. None when a root lies between m0 and that level or m0 is an
/// equilibrium. Throws ZeroQuadraticCoefficient when A = 0.
std::optional<double> riccati_exit_time_closed_form(const RiccatiParams& params);

/// Solution sampled on a grid (RK4 with sub-steps of at most dt); no band
/// check.
MeanCurve riccati_curve(const RiccatiParams& params, const TimeGrid& grid, double dt = 1e-4);

struct RiccatiCase {
  State a = 0;
  State b = 1;
  double alpha = 0.0;
  double m0 = 0.0;
};

struct RiccatiRow {
  RiccatiCase params;
  std::optional<double> exit_time;
};

/// Exit times for a list of cases, computed in parallel; output order
/// follows the input.
std::vector<RiccatiRow> riccati_table(const std::vector<RiccatiCase>& cases, double dt = 1e-4,
                                      double t_max = 100.0, unsigned threads = 0);

}  // namespace mfchain
