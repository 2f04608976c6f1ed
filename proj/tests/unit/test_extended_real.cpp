#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lyap/errors.hpp"
#include "lyap/extended_real.hpp"

using lyap::ExtendedReal;

TEST(ExtendedReal, MinusInfinityAbsorbsAddition) {
  const auto ninf = ExtendedReal::minus_infinity();
  EXPECT_TRUE((ninf + 3.0).is_minus_infinity());
  EXPECT_TRUE((ExtendedReal(-1e300) + ninf).is_minus_infinity());
  EXPECT_TRUE((ninf / 7.0).is_minus_infinity());
  EXPECT_TRUE((ninf * 0.5).is_minus_infinity());
}

TEST(ExtendedReal, LogOfZeroIsTagged) {
  EXPECT_TRUE(ExtendedReal::log_of(0.0).is_minus_infinity());
  EXPECT_DOUBLE_EQ(ExtendedReal::log_of(std::exp(2.0)).value(), 2.0);
  EXPECT_THROW(ExtendedReal::log_of(-1.0), lyap::ParameterError);
}

TEST(ExtendedReal, OrderingPutsMinusInfinityBelowEverything) {
  const auto ninf = ExtendedReal::minus_infinity();
  EXPECT_LT(ninf, ExtendedReal(-1e308));
  EXPECT_EQ(ninf, ExtendedReal::minus_infinity());
  EXPECT_EQ(lyap::max(ninf, ExtendedReal(1.0)), ExtendedReal(1.0));
  EXPECT_TRUE(lyap::min(ninf, ExtendedReal(1.0)).is_minus_infinity());
}

TEST(ExtendedReal, ValueOfMinusInfinityThrows) {
  EXPECT_THROW((void)ExtendedReal::minus_infinity().value(), lyap::ParameterError);
  EXPECT_THROW(ExtendedReal{std::nan("")}, lyap::ParameterError);
  EXPECT_THROW(ExtendedReal{HUGE_VAL}, lyap::ParameterError);
}

TEST(ExtendedReal, SubtractingMinusInfinityIsRejected) {
  EXPECT_THROW((void)(ExtendedReal(1.0) - ExtendedReal::minus_infinity()), lyap::ParameterError);
  EXPECT_TRUE((ExtendedReal::minus_infinity() - ExtendedReal(1.0)).is_minus_infinity());
}

TEST(ExtendedReal, Prints) {
  std::ostringstream os;
  os << ExtendedReal::minus_infinity() << ' ' << ExtendedReal(0.5);
  EXPECT_EQ(os.str(), "-inf 0.5");
}
