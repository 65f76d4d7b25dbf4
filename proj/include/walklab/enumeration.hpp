#pragma once
// Exhaustive small-n oracle: walks every path of the (2d)-ary prefix tree once
// and accumulates exact rational laws.  Used to pin Monte Carlo estimators and
// the escape-probability solver at small horizons.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace walklab {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0, reduced

  static Fraction make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::invalid_argument("zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    return Fraction{g ? n / g : 0, g ? d / g : 1};
  }
  Fraction add(const Fraction& o) const {
    const __int128 n = static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den;
    const __int128 d = static_cast<__int128>(den) * o.den;
    return reduce128(n, d);
  }
  Fraction sub(const Fraction& o) const { return add(Fraction{-o.num, o.den}); }
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Fraction& o) const { return !(*this == o); }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

 private:
  static Fraction reduce128(__int128 n, __int128 d) {
    const __int128 a = n < 0 ? -n : n;
    __int128 g = gcd128(a, d);
    if (g == 0) g = 1;
    n /= g;
    d /= g;
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("fraction overflow");
    return Fraction{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
  }
  static __int128 gcd128(__int128 a, __int128 b) {
    while (b) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
};

struct EnumerationResult {
  int d = 0;
  int n_max = 0;

  // exact_count[m][k], 1 <= k <= m <= n_max: expected number of sites visited
  // exactly k times by step m
  std::vector<std::vector<Fraction>> exact_count;
  // origin_law[m][j], 0 <= j <= m: P(local time of origin at step m equals j)
  std::vector<std::vector<Fraction>> origin_law;
  // no_return[m], 1 <= m <= n_max + 1: P(walk avoids the origin at steps
  // 1..m-1); no_return[1] = 1 by convention
  std::vector<Fraction> no_return;

  // expected number of sites with at least t visits by step m
  Fraction at_least(int t, int m) const {
    if (m < 1 || m > n_max || t < 1) throw std::out_of_range("at_least(t, m)");
    Fraction acc{0, 1};
    for (int k = t; k <= m; ++k) acc = acc.add(exact_count[m][k]);
    return acc;
  }
};

// Enumerates all (2d)^m prefixes for m <= n_max.  Refuses when (2d)^n_max
// exceeds the node budget.
EnumerationResult enumerate_paths(int d, int n_max, std::uint64_t budget = 100000000ull);

}  // namespace walklab
