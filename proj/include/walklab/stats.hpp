#pragma once
// Small statistics toolbox used by the estimation modules and reports.

#include <cstdint>
#include <vector>

namespace walklab {

struct MeanVar {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

double binomial_se(double p_hat, std::uint64_t trials);

struct Interval {
  double lo, hi;
};
// Wilson score interval for a binomial proportion
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

struct GofResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  int bins_used = 0;
};

// Chi-square goodness of fit of counts[j], j = 0,1,..., against the geometric
// law P(j) = (1-ratio) * ratio^j with a fully specified ratio (no fitted
// parameters, df = bins - 1).  Trailing bins are pooled so every expected
// count is at least min_expected.
GofResult chi_square_geometric(const std::vector<std::int64_t>& counts, std::uint64_t total,
                               double ratio, double min_expected = 5.0);

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
// least squares on (x, y) pairs
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

double chi_square_sf(double statistic, int df);  // upper tail probability

}  // namespace walklab
