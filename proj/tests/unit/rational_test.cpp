#include <gtest/gtest.h>

#include "pcfbounds/rational.hpp"

namespace pcf {
namespace {

TEST(Rational, Parse) {
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(parse_rational(" 6/8 "), Rational(3, 4));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("0/5"), Rational(0));
  EXPECT_EQ(parse_rational("123456789012345678901234567890/2"), Rational(mpz_class("61728394506172839450617283945")));
}

TEST(Rational, RejectsFloatsAndJunk) {
  for (const char* bad : {"0.5", "1e-3", "-1/2", "1/0", "", "/2", "1/", "a/b", "1//2"}) {
    EXPECT_THROW(parse_rational(bad), RationalParseError) << bad;
  }
}

TEST(Rational, Format) {
  EXPECT_EQ(to_string(Rational(2, 4)), "1/2");
  EXPECT_EQ(to_string(Rational(3)), "3");
  EXPECT_EQ(to_fraction_string(Rational(3)), "3/1");
  EXPECT_EQ(to_fraction_string(Rational(6, 9)), "2/3");
  EXPECT_DOUBLE_EQ(to_double(Rational(1, 4)), 0.25);
}

TEST(Rational, HashFollowsValue) {
  EXPECT_EQ(hash_value(Rational(2, 4)), hash_value(Rational(1, 2)));
  EXPECT_NE(hash_value(Rational(1, 2)), hash_value(Rational(1, 3)));
}

}  // namespace
}  // namespace pcf
