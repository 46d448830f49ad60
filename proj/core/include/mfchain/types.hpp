#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfchain {

/// Failure categories raised by the library. Every thrown mfchain::Error
/// carries exactly one of these.
enum class ErrorKind {
  InvalidArgument,
  NegativeRate,
  RowSumViolation,
  InvalidPath,
  InvalidRate,
  MajorantViolation,
  UnsupportedTransition,
  InsufficientPaths,
  InadmissiblePerturbation,
  NoConvergence,
  NonFiniteField,
  EmptyControlSet,
  NonFiniteState,
  ZeroQuadraticCoefficient,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Integer-valued chain state. The countable space {0,1,2,...} is always
/// handled through a finite truncation.
using State = int;

/// Ordered, strictly increasing list of nonnegative states. Algorithms work
/// with positions into this list ("indices"); values enter through
/// quantities such as x(t) or the (j - i) jump sizes.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::vector<State> states);

  /// {first, first + 1, ..., last}
  static StateSpace range(State first, State last);

  std::size_t size() const noexcept { return states_.size(); }
  State value(std::size_t index) const { return states_[index]; }
  std::span<const State> values() const noexcept { return states_; }
  bool contains(State s) const noexcept;
  /// Throws InvalidArgument when s is not in the space.
  std::size_t index_of(State s) const;
  State min() const { return states_.front(); }
  State max() const { return states_.back(); }

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<State> states_;
  bool contiguous_ = true;
};

/// Real function on states, e.g. the mean functionals kappa, kappa_f, kappa_h.
using StateFunction = std::function<double(State)>;

inline StateFunction identity_function() {
  return [](State s) { return static_cast<double>(s); };
}
inline StateFunction constant_function(double c) {
  return [c](State) { return c; };
}
inline StateFunction indicator_function(State target) {
  return [target](State s) { return s == target ? 1.0 : 0.0; };
}

/// Closed control interval U = [lo, hi].
struct ControlSet {
  double lo = 0.0;
  double hi = 1e6;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
  /// Throws EmptyControlSet when lo > hi or a bound is NaN.
  void validate() const;
};

/// Uniform time grid 0 = t_0 < ... < t_K = T.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, std::size_t intervals);

  double horizon() const noexcept { return horizon_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t points() const noexcept { return intervals_ + 1; }
  double step() const noexcept { return horizon_ / static_cast<double>(intervals_); }
  double time(std::size_t k) const noexcept;
  std::vector<double> times() const;

  /// k such that t lies in (t_k, t_{k+1}]; 0 for t <= 0, K-1 for t >= T.
  std::size_t left_cell(double t) const noexcept;
  /// k such that t lies in [t_k, t_{k+1}); K-1 for t >= T.
  std::size_t cell(double t) const noexcept;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_ = 1.0;
  std::size_t intervals_ = 1;
};

}  // namespace mfchain
