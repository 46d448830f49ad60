#include "mfchain/mean_curve.hpp"

#include <algorithm>
#include <cmath>

namespace mfchain {

MeanCurve::MeanCurve(TimeGrid grid, std::vector<double> values, std::string kappa_tag)
    : grid_(grid), values_(std::move(values)), kappa_tag_(std::move(kappa_tag)) {
  if (values_.size() != grid_.points())
    throw Error(ErrorKind::InvalidArgument, "mean curve needs one value per grid point");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "mean curve values must be finite");
}

MeanCurve MeanCurve::constant(const TimeGrid& grid, double value, std::string kappa_tag) {
  return MeanCurve(grid, std::vector<double>(grid.points(), value), std::move(kappa_tag));
}

double MeanCurve::interpolate(double t) const noexcept {
  if (!(t > 0.0)) return values_.front();
  if (t >= grid_.horizon()) return values_.back();
  std::size_t k = grid_.cell(t);
  double t0 = grid_.time(k);
  double w = (t - t0) / grid_.step();
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

double sup_distance(const MeanCurve& a, const MeanCurve& b) {
  if (a.values_.size() != b.values_.size())
    throw Error(ErrorKind::InvalidArgument, "mean curves live on different grids");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values_.size(); ++k) d = std::max(d, std::abs(a.values_[k] - b.values_[k]));
  return d;
}

MarginalCurve::MarginalCurve(TimeGrid grid, std::size_t n_states, std::vector<double> probabilities)
    : grid_(grid), n_states_(n_states), probs_(std::move(probabilities)) {
  if (probs_.size() != grid_.points() * n_states_)
    throw Error(ErrorKind::InvalidArgument, "marginal curve has the wrong shape");
}

void MarginalCurve::interpolate(double t, std::span<double> out) const {
  if (!(t > 0.0)) {
    std::copy_n(at(0).begin(), n_states_, out.begin());
    return;
  }
  if (t >= grid_.horizon()) {
    std::copy_n(at(grid_.intervals()).begin(), n_states_, out.begin());
    return;
  }
  std::size_t k = grid_.cell(t);
  double w = (t - grid_.time(k)) / grid_.step();
  auto p0 = at(k);
  auto p1 = at(k + 1);
  for (std::size_t i = 0; i < n_states_; ++i) out[i] = (1.0 - w) * p0[i] + w * p1[i];
}

MeanCurve MarginalCurve::expectation(const StateSpace& space, const StateFunction& kappa,
                                     std::string tag) const {
  std::vector<double> kv(n_states_);
  for (std::size_t i = 0; i < n_states_; ++i) kv[i] = kappa(space.value(i));
  std::vector<double> values(grid_.points());
  for (std::size_t k = 0; k < values.size(); ++k) {
    auto p = at(k);
    double s = 0.0;
    for (std::size_t i = 0; i < n_states_; ++i) s += p[i] * kv[i];
    values[k] = s;
  }
  return MeanCurve(grid_, std::move(values), std::move(tag));
}

}  // namespace mfchain
