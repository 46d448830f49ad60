#include "mfchain/types.hpp"

#include <algorithm>
#include <cmath>

namespace mfchain {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeRate: return "NegativeRate";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::InvalidPath: return "InvalidPath";
    case ErrorKind::InvalidRate: return "InvalidRate";
    case ErrorKind::MajorantViolation: return "MajorantViolation";
    case ErrorKind::UnsupportedTransition: return "UnsupportedTransition";
    case ErrorKind::InsufficientPaths: return "InsufficientPaths";
    case ErrorKind::InadmissiblePerturbation: return "InadmissiblePerturbation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonFiniteField: return "NonFiniteField";
    case ErrorKind::EmptyControlSet: return "EmptyControlSet";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ZeroQuadraticCoefficient: return "ZeroQuadraticCoefficient";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

StateSpace::StateSpace(std::vector<State> states) : states_(std::move(states)) {
  if (states_.empty()) throw Error(ErrorKind::InvalidArgument, "state space is empty");
  for (std::size_t k = 0; k < states_.size(); ++k) {
    if (states_[k] < 0) throw Error(ErrorKind::InvalidArgument, "states must be nonnegative");
    if (k > 0 && states_[k] <= states_[k - 1])
      throw Error(ErrorKind::InvalidArgument, "states must be strictly increasing");
  }
  contiguous_ = states_.back() - states_.front() + 1 == static_cast<State>(states_.size());
}

StateSpace StateSpace::range(State first, State last) {
  if (last < first) throw Error(ErrorKind::InvalidArgument, "empty state range");
  std::vector<State> s(static_cast<std::size_t>(last - first + 1));
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = first + static_cast<State>(k);
  return StateSpace(std::move(s));
}

bool StateSpace::contains(State s) const noexcept {
  if (states_.empty() || s < states_.front() || s > states_.back()) return false;
  if (contiguous_) return true;
  return std::binary_search(states_.begin(), states_.end(), s);
}

std::size_t StateSpace::index_of(State s) const {
  if (!states_.empty() && s >= states_.front() && s <= states_.back()) {
    if (contiguous_) return static_cast<std::size_t>(s - states_.front());
    auto it = std::lower_bound(states_.begin(), states_.end(), s);
    if (it != states_.end() && *it == s) return static_cast<std::size_t>(it - states_.begin());
  }
  throw Error(ErrorKind::InvalidArgument, "state " + std::to_string(s) + " outside the state space");
}

void ControlSet::validate() const {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw Error(ErrorKind::EmptyControlSet, "control set [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "] is empty");
}

TimeGrid::TimeGrid(double horizon, std::size_t intervals) : horizon_(horizon), intervals_(intervals) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(ErrorKind::InvalidArgument, "time horizon must be positive and finite");
  if (intervals == 0) throw Error(ErrorKind::InvalidArgument, "time grid needs at least one interval");
}

double TimeGrid::time(std::size_t k) const noexcept {
  if (k >= intervals_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(intervals_);
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(points());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
  return t;
}

std::size_t TimeGrid::left_cell(double t) const noexcept {
  if (!(t > 0.0)) return 0;
  double x = std::ceil(t / horizon_ * static_cast<double>(intervals_)) - 1.0;
  if (x < 0.0) return 0;
  auto k = static_cast<std::size_t>(x);
  return k >= intervals_ ? intervals_ - 1 : k;
}

std::size_t TimeGrid::cell(double t) const noexcept {
  if (!(t > 0.0)) return 0;
  double x = std::floor(t / horizon_ * static_cast<double>(intervals_));
  auto k = static_cast<std::size_t>(x);
  return k >= intervals_ ? intervals_ - 1 : k;
}

}  // namespace mfchain
