#include "lyap/projective.hpp"

#include <cmath>
#include <numbers>

#include "lyap/errors.hpp"

namespace lyap {

std::span<const double> ProjState::coords() const {
  if (!coords_) throw ParameterError("ProjState: cemetery has no coordinates");
  return *coords_;
}

ProjState normalize(std::span<const double> v) {
  const double norm = euclidean_norm(v);
  if (!std::isfinite(norm)) throw ParameterError("normalize: vector must be finite");
  if (norm <= kKillThreshold) return ProjState::cemetery();
  std::vector<double> unit(v.begin(), v.end());
  double sign = 1.0;
  for (double x : unit) {
    if (x != 0.0) {
      sign = x > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  const double scale = sign / norm;
  for (double& x : unit) x *= scale;
  return ProjState(std::move(unit));
}

GainStep apply_log(const Matrix& compound, const ProjState& p) {
  if (p.is_cemetery()) return {ProjState::cemetery(), ExtendedReal::minus_infinity()};
  const auto w = compound.apply(p.coords());
  const double norm = euclidean_norm(w);
  if (norm <= kKillThreshold) return {ProjState::cemetery(), ExtendedReal::minus_infinity()};
  return {normalize(w), std::log(norm)};
}

double angle_of(const ProjState& p) {
  if (p.is_cemetery()) throw ParameterError("angle_of: cemetery has no angle");
  if (p.dimension() != 2) throw ParameterError("angle_of: requires a point of P(R^2)");
  const auto c = p.coords();
  double theta = std::atan2(c[1], c[0]);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta = 0.0;
  return theta;
}

ProjState from_angle(double theta) {
  if (!(theta >= 0.0 && theta < std::numbers::pi)) {
    throw ParameterError("from_angle: theta must lie in [0, pi)");
  }
  const double v[2] = {std::cos(theta), std::sin(theta)};
  return normalize(v);
}

ProjState frame_direction(std::size_t dimension, std::size_t i) {
  if (i >= dimension) throw ParameterError("frame_direction: index out of range");
  std::vector<double> e(dimension, 0.0);
  e[i] = 1.0;
  return normalize(e);
}

}  // namespace lyap
