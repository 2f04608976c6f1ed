#pragma once

#include <compare>
#include <iosfwd>

namespace lyap {

/// A value in [-inf, +inf). The bottom element is a tag, never a floating
/// sentinel, so a finite result can never be confused with a collapse.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  // NOLINTNEXTLINE(google-explicit-constructor)
  ExtendedReal(double value);

  static constexpr ExtendedReal minus_infinity() {
    ExtendedReal r;
    r.minus_infinity_ = true;
    return r;
  }

  /// log(x) for x >= 0, with log(0) = -inf.
  static ExtendedReal log_of(double x);

  constexpr bool is_finite() const { return !minus_infinity_; }
  constexpr bool is_minus_infinity() const { return minus_infinity_; }

  /// Finite value; throws ParameterError on -inf.
  double value() const;

  /// Lossy conversion for plotting/printing: -inf maps to -HUGE_VAL.
  double to_double() const;

  ExtendedReal& operator+=(const ExtendedReal& other);

  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) {
    a += b;
    return a;
  }
  /// a - b; b must be finite.
  friend ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b);
  /// Multiplication by a strictly positive scalar.
  friend ExtendedReal operator*(const ExtendedReal& a, double c);
  friend ExtendedReal operator*(double c, const ExtendedReal& a) { return a * c; }
  friend ExtendedReal operator/(const ExtendedReal& a, double c);

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);
  friend std::partial_ordering operator<=>(const ExtendedReal& a,
                                           const ExtendedReal& b);

 private:
  double value_ = 0.0;
  bool minus_infinity_ = false;
};

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x);

/// Pointwise maximum.
ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b);
ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b);

}  // namespace lyap
