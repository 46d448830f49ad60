#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfchain/chain.hpp"
#include "mfchain/mean_curve.hpp"

namespace mfchain {

/// Everything that determines L^u along a path simulated under P: the
/// controlled intensity, the reference generator, the control signal and
/// the mean curve plugged into the intensity. `grid` is the evaluation grid
/// (density values, inner means and segment splitting all use it).
struct MeasureChange {
  IntensitySpec intensity;
  GeneratorMatrix reference;
  Control control;
  std::optional<MeanCurve> mean;
  TimeGrid grid{1.0, 256};

  double mean_at(double t) const { return mean ? mean->left_value(t) : 0.0; }
  double control_at(double t, const PathPrefix& prefix) const { return control ? control(t, prefix) : 0.0; }
  const MeanCurve* mean_ptr() const { return mean ? &*mean : nullptr; }
};

/// ell_ij = lambda_ij / g_ij - 1 off the diagonal, 0 on it.
class LikelihoodRatioField {
 public:
  LikelihoodRatioField(IntensitySpec intensity, GeneratorMatrix reference);

  /// ell row out of prefix.current(); throws UnsupportedTransition where
  /// lambda_ij > 0 but g_ij = 0.
  void row(double t, const PathPrefix& prefix, double mean, double control, std::span<double> out) const;
  double operator()(double t, const PathPrefix& prefix, double mean, double control, State j) const;

  const IntensitySpec& intensity() const noexcept { return intensity_; }
  const GeneratorMatrix& reference() const noexcept { return reference_; }

 private:
  IntensitySpec intensity_;
  GeneratorMatrix reference_;
};

LikelihoodRatioField likelihood_ratio_field(const IntensitySpec& intensity, const GeneratorMatrix& reference);

/// L^u at the grid points and at every jump time of a path (value right
/// after the jump). When a realized jump has lambda_ij = 0 the density is
/// zero from then on and zero_rate_at_jump records where.
struct DensityTrajectory {
  std::vector<double> times;
  std::vector<double> values;
  bool zero_rate_at_jump = false;
  double zero_rate_time = 0.0;

  double terminal() const { return values.back(); }
};

/// Product (closed) form, accumulated in log space.
DensityTrajectory density_product(const JumpPath& path, const MeasureChange& change);

/// dL = L(s^-) sum_ij I_i(s^-) ell_ij dM_ij: exact jump factors (1 + ell_ij),
/// explicit Euler steps of size <= dt for the drift -L sum_j ell_ij g_ij.
DensityTrajectory density_sde_euler(const JumpPath& path, const MeasureChange& change, double dt);

/// log L^u(T) on one path (-inf when a realized jump has zero rate).
double log_density_terminal(const JumpPath& path, const MeasureChange& change);

struct EdgeCheck {
  State i = 0;
  State j = 0;
  double mean = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct MartingaleReport {
  double mean_L = 0.0;
  double se_L = 0.0;
  bool pass_L = false;
  std::vector<EdgeCheck> per_edge;
  std::size_t n_paths = 0;

  bool all_pass() const;
};

/// Simulates n paths under P and checks E[L(T)] = 1 and
/// E[L(T) M^u_ij(T)] = 0 with M^u_ij(T) = N_ij(T) - int I_i lambda_ij ds,
/// each within 3 standard errors. Empty `edges` tracks every (i, j) with
/// g_ij > 0.
MartingaleReport martingale_checks(const MeasureChange& change, const InitialLaw& law, double horizon,
                                   std::size_t n, std::uint64_t seed,
                                   std::vector<std::pair<State, State>> edges = {}, unsigned threads = 0);

MartingaleReport martingale_checks(const MeasureChange& change, const PathEnsemble& ensemble,
                                   std::vector<std::pair<State, State>> edges = {}, unsigned threads = 0);

}  // namespace mfchain
