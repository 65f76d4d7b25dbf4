#include <doctest.h>

#include "walklab/enumeration.hpp"

using namespace walklab;

TEST_CASE("fraction arithmetic stays reduced and exact") {
  const auto half = Fraction::make(2, 4);
  CHECK(half.num == 1);
  CHECK(half.den == 2);
  CHECK(Fraction::make(-2, -4) == half);
  CHECK(Fraction::make(2, -4).num == -1);
  const auto third = Fraction::make(1, 3);
  CHECK(half.add(third) == Fraction::make(5, 6));
  CHECK(half.sub(third) == Fraction::make(1, 6));
  CHECK(half.str() == "1/2");
  CHECK(half.value() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Fraction::make(1, 0), std::invalid_argument);
}

TEST_CASE("no-return chain matches hand counts in small dimension") {
  const auto d1 = enumerate_paths(1, 2);
  CHECK(d1.no_return[1] == Fraction::make(1, 1));
  CHECK(d1.no_return[2] == Fraction::make(1, 1));  // one step cannot return
  CHECK(d1.no_return[3] == Fraction::make(1, 2));
  const auto d2 = enumerate_paths(2, 2);
  CHECK(d2.no_return[3] == Fraction::make(3, 4));
}

TEST_CASE("three-dimensional escape chain is exact") {
  const auto res = enumerate_paths(3, 4);
  CHECK(res.no_return[2] == Fraction::make(1, 1));
  CHECK(res.no_return[3] == Fraction::make(5, 6));
  // odd steps cannot return, so the chain is flat across them
  CHECK(res.no_return[4] == Fraction::make(5, 6));
  CHECK(res.no_return[5] == Fraction::make(19, 24));
}

TEST_CASE("exact per-level counts at three steps") {
  const auto res = enumerate_paths(3, 3);
  CHECK(res.exact_count[1][1] == Fraction::make(1, 1));
  CHECK(res.exact_count[2][1] == Fraction::make(2, 1));
  CHECK(res.exact_count[2][2] == Fraction::make(0, 1));  // double visit needs 3 steps
  CHECK(res.exact_count[3][1] == Fraction::make(8, 3));
  CHECK(res.exact_count[3][2] == Fraction::make(1, 6));
  CHECK(res.exact_count[3][3] == Fraction::make(0, 1));
  // suffix sums
  CHECK(res.at_least(1, 3) == Fraction::make(8, 3).add(Fraction::make(1, 6)));
  CHECK(res.at_least(2, 3) == Fraction::make(1, 6));
}

TEST_CASE("origin occupation law is a probability law with pinned values") {
  const auto res = enumerate_paths(3, 4);
  CHECK(res.origin_law[1][0] == Fraction::make(1, 1));
  CHECK(res.origin_law[1][1] == Fraction::make(0, 1));
  CHECK(res.origin_law[2][1] == Fraction::make(1, 6));
  CHECK(res.origin_law[4][2] == Fraction::make(1, 36));
  for (int m = 1; m <= res.n_max; ++m) {
    Fraction sum{0, 1};
    for (int j = 0; j <= m; ++j) sum = sum.add(res.origin_law[m][j]);
    CHECK(sum == Fraction::make(1, 1));
  }
}

TEST_CASE("occupation mass accounts for every step exactly") {
  for (int d : {1, 3}) {
    const auto res = enumerate_paths(d, 4);
    for (int m = 1; m <= res.n_max; ++m) {
      Fraction mass{0, 1};
      for (int k = 1; k <= m; ++k) {
        Fraction scaled{0, 1};
        for (int i = 0; i < k; ++i) scaled = scaled.add(res.exact_count[m][k]);
        mass = mass.add(scaled);
      }
      CHECK(mass == Fraction::make(m, 1));
    }
  }
}

TEST_CASE("longer enumerations extend shorter ones unchanged") {
  const auto small = enumerate_paths(3, 3);
  const auto big = enumerate_paths(3, 4);
  for (int m = 1; m <= 3; ++m) {
    CHECK(small.no_return[m] == big.no_return[m]);
    for (int k = 1; k <= m; ++k) CHECK(small.exact_count[m][k] == big.exact_count[m][k]);
    for (int j = 0; j <= m; ++j) CHECK(small.origin_law[m][j] == big.origin_law[m][j]);
  }
}

TEST_CASE("node budget is enforced") {
  CHECK_THROWS_AS(enumerate_paths(3, 10, 1000), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_paths(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_paths(0, 3), std::invalid_argument);
}
