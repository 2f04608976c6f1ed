#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lyap/extended_real.hpp"
#include "lyap/matrix.hpp"

namespace lyap {

/// Vectors at or below this norm are treated as the zero vector: the step
/// lands on the cemetery. Only exact (or numerically exact) collapse trips it.
inline constexpr double kKillThreshold = 1e-300;

/// A point of P(R^D) with an adjoined absorbing cemetery. Non-cemetery points
/// store the unit representative whose first nonzero coordinate is positive.
class ProjState {
 public:
  static ProjState cemetery() { return ProjState(); }

  bool is_cemetery() const noexcept { return !coords_.has_value(); }
  std::size_t dimension() const noexcept { return coords_ ? coords_->size() : 0; }
  /// Unit representative; throws ParameterError on the cemetery.
  std::span<const double> coords() const;

  friend bool operator==(const ProjState&, const ProjState&) = default;

 private:
  friend ProjState normalize(std::span<const double> v);
  ProjState() = default;
  explicit ProjState(std::vector<double> unit) : coords_(std::move(unit)) {}

  std::optional<std::vector<double>> coords_;
};

/// One step of the projective cocycle: the image point and log ||A v|| for the
/// unit representative v. log_gain is -inf iff next is the cemetery.
struct GainStep {
  ProjState next;
  ExtendedReal log_gain;
};

ProjState normalize(std::span<const double> v);

GainStep apply_log(const Matrix& compound, const ProjState& p);

/// Chart on the projective line (D = 2): [cos t, sin t] <-> t in [0, pi).
double angle_of(const ProjState& p);
ProjState from_angle(double theta);

/// Standard frame direction e_i of R^D.
ProjState frame_direction(std::size_t dimension, std::size_t i);

}  // namespace lyap
