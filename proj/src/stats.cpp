#include "walklab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace walklab {

double binomial_se(double p_hat, std::uint64_t trials) {
  if (trials == 0) return 0.0;
  const double v = p_hat * (1.0 - p_hat) / static_cast<double>(trials);
  return v > 0 ? std::sqrt(v) : 0.0;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double chi_square_sf(double statistic, int df) {
  if (df <= 0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

GofResult chi_square_geometric(const std::vector<std::int64_t>& counts, std::uint64_t total,
                               double ratio, double min_expected) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must be in (0,1)");
  if (total == 0) throw std::invalid_argument("empty sample");
  const double n = static_cast<double>(total);

  // expected mass per bin, pooling the geometric tail into the final cell so
  // every individual expectation clears min_expected
  std::vector<double> expected;
  std::vector<double> observed;
  double tail_mass = 1.0;  // P(j' >= j)
  std::int64_t seen = 0;
  std::size_t j = 0;
  while (true) {
    const double mass = (1.0 - ratio) * std::pow(ratio, static_cast<double>(j));
    const double rest = tail_mass - mass;  // P(j' > j)
    if (mass * n < min_expected || rest * n < min_expected) {
      // final pooled cell: everything from j upward
      double obs = 0;
      for (std::size_t k = j; k < counts.size(); ++k) obs += static_cast<double>(counts[k]);
      observed.push_back(obs);
      expected.push_back(tail_mass * n);
      seen += static_cast<std::int64_t>(obs);
      break;
    }
    observed.push_back(j < counts.size() ? static_cast<double>(counts[j]) : 0.0);
    expected.push_back(mass * n);
    seen += j < counts.size() ? counts[j] : 0;
    tail_mass = rest;
    ++j;
  }
  if (static_cast<std::uint64_t>(seen) != total)
    throw std::invalid_argument("counts do not sum to total");

  GofResult res;
  res.bins_used = static_cast<int>(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    res.statistic += d * d / expected[i];
  }
  res.df = res.bins_used - 1;
  res.p_value = chi_square_sf(res.statistic, res.df);
  return res;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  if (vx <= 0) throw std::invalid_argument("degenerate x values");
  LinFit f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return f;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace walklab
