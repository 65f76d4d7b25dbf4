#include <doctest.h>

#include <cmath>

#include "walklab/enumeration.hpp"
#include "walklab/green.hpp"
#include "walklab/hitting.hpp"

using namespace walklab;

namespace {
LatticePoint e1_of(int d) {
  auto p = LatticePoint::origin(d);
  p.coords[0] = 1;
  return p;
}
}  // namespace

TEST_CASE("finite escape chain starts at one and decreases under coupling") {
  const auto one = escape_by(3, 1, 500, 42);
  CHECK(one.value == 1.0);
  CHECK(one.std_error == 0.0);
  const auto two = escape_by(3, 2, 500, 42);
  CHECK(two.value == 1.0);  // a single step cannot return

  // same seed means the same trajectories inspected longer, so the no-return
  // fraction is monotone exactly, not just in expectation
  double prev = 1.0;
  for (std::uint64_t n : {3, 5, 9, 17, 33}) {
    const auto est = escape_by(3, n, 400, 42);
    CHECK(est.value <= prev);
    prev = est.value;
  }
}

TEST_CASE("finite escape at small n matches the exact enumeration") {
  const auto oracle = enumerate_paths(3, 4);
  const std::uint64_t reps = 200000;
  for (std::uint64_t n : {3, 5}) {
    const auto est = escape_by(3, n, reps, 1);
    const double exact = oracle.no_return[n].value();
    const double gap = std::abs(est.value - exact);
    CHECK(gap < 4.0 * est.std_error + 1e-12);
  }
}

TEST_CASE("escape estimate validates and reports its truncation exponent") {
  CHECK_THROWS_AS(escape_estimate(3, 50, 100, 1), std::invalid_argument);
  const auto est = escape_estimate(3, 200, 500, 1);
  CHECK(est.bias_exponent == doctest::Approx(-0.5));
  CHECK(est.value > 0.5);
  CHECK(est.value < 0.9);
}

TEST_CASE("race outcomes partition the replicas") {
  const auto re = race_estimate(3, e1_of(3), 2000, 3000, 5);
  CHECK(re.return_first + re.target_first + re.censored ==
        static_cast<std::int64_t>(re.replicas));
  CHECK(re.q == doctest::Approx(re.return_first / 3000.0));
  CHECK(re.s == doctest::Approx(re.target_first / 3000.0));
  CHECK(re.q + re.s + re.censored_fraction == doctest::Approx(1.0).epsilon(1e-12));
  // neighbour race is symmetric; allow a generous band
  CHECK(std::abs(re.q - re.s) < 6.0 * (re.q_se + re.s_se));
  CHECK_THROWS_AS(race_estimate(3, LatticePoint::origin(3), 100, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("occupation law histograms account for every replica") {
  const auto rep = origin_occupation_law(3, 200, 2000, 7);
  CHECK(rep.hist.total() == 2000);
  CHECK(rep.hist.censored == 0);  // every replica yields a count
  CHECK_FALSE(rep.gof.has_value());

  const auto fitted = origin_occupation_law(3, 200, 2000, 7, 0.34);
  REQUIRE(fitted.gof.has_value());
  CHECK(fitted.geom_ratio == 0.34);
  CHECK(fitted.gof->p_value >= 0.0);
  CHECK(fitted.gof->p_value <= 1.0);
  CHECK(fitted.hist.counts == rep.hist.counts);  // fit does not disturb counts
}

TEST_CASE("origin occupation law at a tiny horizon matches the exact law") {
  const auto oracle = enumerate_paths(3, 4);
  const auto rep = origin_occupation_law(3, 4, 60000, 11);
  REQUIRE(rep.hist.counts.size() >= 3);
  const double n = 60000.0;
  for (int j = 0; j <= 2; ++j) {
    const double p_hat = rep.hist.counts[j] / n;
    const double exact = oracle.origin_law[4][j].value();
    const double se = std::sqrt(exact * (1 - exact) / n);
    CHECK(std::abs(p_hat - exact) < 4.0 * se + 1e-12);
  }
}

TEST_CASE("pair occupation counts visits to both points") {
  const auto rep = pair_occupation_law(3, e1_of(3), 300, 1500, 13);
  CHECK(rep.hist.total() == 1500);
  // the first step always lands on a neighbour of the origin, but not
  // necessarily the watched one; mass at zero must remain
  CHECK(rep.hist.counts[0] > 0);
  CHECK(rep.hist.counts.size() > 2);
}

TEST_CASE("before-return law censors exactly the non-returners") {
  const std::uint64_t reps = 4000;
  const auto rep = visits_before_return_law(3, e1_of(3), 3000, reps, 17);
  CHECK(rep.hist.total() + static_cast<std::int64_t>(rep.hist.censored) ==
        static_cast<std::int64_t>(reps));
  // censored fraction estimates the escape probability
  const double cens = static_cast<double>(rep.hist.censored) / static_cast<double>(reps);
  CHECK(cens > 0.55);
  CHECK(cens < 0.75);
}

TEST_CASE("coupled ensemble reproduces the standalone estimators exactly") {
  const int d = 3;
  const std::uint64_t horizon = 3000, reps = 2000, seed = 23;
  auto e1 = e1_of(d);
  auto e1x2 = LatticePoint::origin(d);
  e1x2.coords[0] = 2;

  const auto coupled = coupled_hitting_estimates(d, {e1, e1x2}, horizon, reps, seed);
  REQUIRE(coupled.size() == 2);

  // the same (seed, replica, purpose) streams drive the standalone kernels,
  // so the coupled figures must agree bit for bit
  const auto avoid1 = target_avoidance(d, e1, horizon, reps, seed);
  const auto avoid2 = target_avoidance(d, e1x2, horizon, reps, seed);
  CHECK(coupled[0].gamma_x == avoid1.value);
  CHECK(coupled[1].gamma_x == avoid2.value);

  const auto race1 = race_estimate(d, e1, horizon, reps, seed);
  CHECK(coupled[0].q == race1.q);
  CHECK(coupled[0].s == race1.s);
  CHECK(coupled[0].race_censored_fraction == doctest::Approx(race1.censored_fraction));

  // both targets share the same replica trajectories, hence the same returns
  CHECK(coupled[0].gamma == coupled[1].gamma);

  // covariance diagonal matches the binomial variance up to the finite-sample
  // correction factor r/(r-1)
  const double r = static_cast<double>(reps);
  const double g = coupled[0].gamma;
  const double binom = g * (1.0 - g) / r;
  CHECK(coupled[0].cov[0] == doctest::Approx(binom * r / (r - 1.0)).epsilon(1e-9));
}

TEST_CASE("identity residuals vanish on oracle inputs") {
  const auto green = extrapolated_green(3, 8);
  const auto gamma = escape_probability(green);
  const auto gx = two_point_escape(green, e1_of(3));
  const auto qs = race_probabilities_exact(gamma.value, gx.value);
  HittingRates exact;
  exact.gamma = gamma.value;
  exact.gamma_x = gx.value;
  exact.q = qs.q;
  exact.s = qs.s;
  const auto res = identity_residuals(exact);
  REQUIRE(res.size() == 4);
  for (const auto& r : res) {
    CHECK(std::abs(r.residual) < 1e-12);
    CHECK(r.se == 0.0);
    CHECK(r.z == 0.0);
  }
}

TEST_CASE("identity residuals from a Monte Carlo run are statistically small") {
  const auto coupled = coupled_hitting_estimates(3, {e1_of(3)}, 100000, 2000, 29);
  const auto rates = HittingRates::from_coupled(coupled[0]);
  const auto res = identity_residuals(rates);
  REQUIRE(res.size() == 4);
  for (const auto& r : res) {
    CHECK(r.se > 0.0);
    CHECK(std::abs(r.z) < 6.0);
  }
}

TEST_CASE("identity residual validation rejects impossible rates") {
  HittingRates bad;
  bad.gamma = 1.5;
  bad.gamma_x = 0.8;
  CHECK_THROWS_AS(identity_residuals(bad), std::invalid_argument);
  HittingRates bad2;
  bad2.gamma = 0.6;
  bad2.gamma_x = 0.8;
  bad2.q = 0.9;
  bad2.s = 0.2;
  CHECK_THROWS_AS(identity_residuals(bad2), std::invalid_argument);
}
