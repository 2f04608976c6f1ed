#include "lyap/extended_real.hpp"

#include <cmath>
#include <ostream>

#include "lyap/errors.hpp"

namespace lyap {

ExtendedReal::ExtendedReal(double value) : value_(value) {
  if (!std::isfinite(value)) {
    if (value == -HUGE_VAL) {
      value_ = 0.0;
      minus_infinity_ = true;
      return;
    }
    throw ParameterError("ExtendedReal: value must be finite or -inf");
  }
}

ExtendedReal ExtendedReal::log_of(double x) {
  if (!(x >= 0.0) || std::isinf(x)) {
    throw ParameterError("ExtendedReal::log_of: argument must be finite and >= 0");
  }
  if (x == 0.0) return minus_infinity();
  return ExtendedReal(std::log(x));
}

double ExtendedReal::value() const {
  if (minus_infinity_) throw ParameterError("ExtendedReal::value: value is -inf");
  return value_;
}

double ExtendedReal::to_double() const {
  return minus_infinity_ ? -HUGE_VAL : value_;
}

ExtendedReal& ExtendedReal::operator+=(const ExtendedReal& other) {
  if (minus_infinity_) return *this;
  if (other.minus_infinity_) {
    *this = minus_infinity();
    return *this;
  }
  value_ += other.value_;
  return *this;
}

ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b) {
  if (b.minus_infinity_) {
    throw ParameterError("ExtendedReal: cannot subtract -inf");
  }
  if (a.minus_infinity_) return a;
  return ExtendedReal(a.value_ - b.value_);
}

ExtendedReal operator*(const ExtendedReal& a, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ParameterError("ExtendedReal: scale factor must be finite and > 0");
  }
  if (a.minus_infinity_) return a;
  return ExtendedReal(a.value_ * c);
}

ExtendedReal operator/(const ExtendedReal& a, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ParameterError("ExtendedReal: divisor must be finite and > 0");
  }
  if (a.minus_infinity_) return a;
  return ExtendedReal(a.value_ / c);
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.minus_infinity_ || b.minus_infinity_) {
    return a.minus_infinity_ == b.minus_infinity_;
  }
  return a.value_ == b.value_;
}

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.minus_infinity_ && b.minus_infinity_) return std::partial_ordering::equivalent;
  if (a.minus_infinity_) return std::partial_ordering::less;
  if (b.minus_infinity_) return std::partial_ordering::greater;
  return a.value_ <=> b.value_;
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
  if (x.is_minus_infinity()) return os << "-inf";
  return os << x.value();
}

ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) { return a < b ? b : a; }
ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) { return b < a ? b : a; }

}  // namespace lyap
