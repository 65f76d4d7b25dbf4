#include <doctest.h>

#include <cmath>

#include "walklab/heavy.hpp"
#include "walklab/walk.hpp"

using namespace walklab;

TEST_CASE("per-level mass constants") {
  CHECK(mu_of(0.5, 1) == doctest::Approx(0.5));
  CHECK(mu_of(0.5, 3) == doctest::Approx(0.125));
  CHECK(mu_of(0.659, 1) == doctest::Approx(0.659));
  CHECK_THROWS_AS(mu_of(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(mu_of(0.5, 0), std::invalid_argument);

  // gamma = 1 - 1/e makes the growth constant exactly 1
  CHECK(lambda_of(1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(lambda_of(1.0), std::invalid_argument);
}

TEST_CASE("level threshold is pinned at a reference point") {
  // lambda(0.659) = 0.92965...; at n = 22027 (log n ~ 10.00002) with b = 3 the
  // threshold sits between 2 and 3
  const ThresholdParams p{0.659, 3.0};
  const double psi = threshold_psi(p, 22027);
  CHECK(psi == doctest::Approx(2.8747).epsilon(1e-3));
  CHECK(threshold_level(p, 22027) == 2);

  // small n: the raw expression dips below 1 and is clamped
  CHECK(threshold_level(p, 16) >= 1);
  CHECK_THROWS_AS(threshold_psi(p, 1), std::invalid_argument);
  CHECK_THROWS_AS(threshold_psi(ThresholdParams{1.5, 3.0}, 100), std::invalid_argument);
}

TEST_CASE("two-phase counts satisfy the exact structural identities") {
  for (std::uint64_t seedling : {1ull, 2ull, 3ull}) {
    const auto hc = heavy_counts(3, 2000, 8000, seedling, 0);
    CHECK(hc.distinct_by_n > 0);
    REQUIRE(hc.max_level() >= 1);

    std::int64_t mass = 0, sites_n = 0, sites_life = 0;
    for (int t = 1; t <= hc.max_level(); ++t) {
      const auto& row = hc.level(t);
      CHECK(row.t == t);
      mass += static_cast<std::int64_t>(t) * row.exact_n;
      sites_n += row.exact_n;
      sites_life += row.lifetime_exact;

      // suffix-sum identities, recomputed independently
      std::int64_t r_sum = 0, v_sum = 0;
      for (int k = t; k <= hc.max_level(); ++k) {
        r_sum += hc.level(k).exact_n;
        v_sum += hc.level(k).lifetime_exact;
      }
      CHECK(row.at_least_n == r_sum);
      CHECK(row.lifetime_at_least == v_sum);
      CHECK(row.deficit == v_sum - r_sum);
      CHECK(row.deficit >= 0);
      CHECK(row.at_least_n <= row.lifetime_at_least);
    }
    CHECK(mass == 2000);  // every step lands on exactly one site
    CHECK(sites_n == static_cast<std::int64_t>(hc.distinct_by_n));
    CHECK(sites_life == static_cast<std::int64_t>(hc.distinct_by_n));
    CHECK(hc.level(1).at_least_n == static_cast<std::int64_t>(hc.distinct_by_n));
    CHECK(hc.level(1).lifetime_at_least == static_cast<std::int64_t>(hc.distinct_by_n));
  }
}

TEST_CASE("equal horizons collapse the lifetime columns onto the time-n columns") {
  const auto hc = heavy_counts(3, 1500, 1500, 9, 2);
  for (int t = 1; t <= hc.max_level(); ++t) {
    const auto& row = hc.level(t);
    CHECK(row.exact_n == row.lifetime_exact);
    CHECK(row.deficit == 0);
  }
}

TEST_CASE("two-phase histogram at n matches a plain walk on the same stream") {
  const std::uint64_t n = 1200, seed = 31, rep = 4;
  const auto hc = heavy_counts(3, n, 4 * n, seed, rep);
  const auto led = simulate_walk<3>(n, seed, rep, purpose::kHeavy);
  CHECK(hc.distinct_by_n == led.distinct_sites());
  const auto& bins = led.histogram().bins();
  for (int t = 1; t <= hc.max_level(); ++t) {
    const auto expected =
        t < static_cast<int>(bins.size()) ? bins[t] : 0;
    CHECK(hc.level(t).exact_n == expected);
  }
}

TEST_CASE("two-phase validation") {
  CHECK_THROWS_AS(heavy_counts(2, 100, 100, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(heavy_counts(3, 0, 100, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(heavy_counts(3, 100, 99, 1, 0), std::invalid_argument);
  const auto hc = heavy_counts(3, 100, 400, 1, 0);
  CHECK_THROWS_AS(hc.level(0), std::out_of_range);
  CHECK_THROWS_AS(hc.level(hc.max_level() + 1), std::out_of_range);
}

TEST_CASE("path maxima dominate their time-n counterparts") {
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto ps = path_max_stats(3, 3000, 12000, 7, rep);
    CHECK(ps.max_by_n >= 1);
    CHECK(ps.max_lifetime >= ps.max_by_n);
  }
  const auto flat = path_max_stats(3, 3000, 3000, 7, 0);
  CHECK(flat.max_lifetime == flat.max_by_n);
}

TEST_CASE("path maximum agrees with the heavy rows on the same stream") {
  const auto hc = heavy_counts(3, 2500, 10000, 13, 1);
  const auto ps = path_max_stats(3, 2500, 10000, 13, 1, purpose::kHeavy);
  int top_n = 0, top_life = 0;
  for (int t = 1; t <= hc.max_level(); ++t) {
    if (hc.level(t).exact_n > 0) top_n = t;
    if (hc.level(t).lifetime_exact > 0) top_life = t;
  }
  CHECK(ps.max_by_n == static_cast<std::uint32_t>(top_n));
  // the lifetime maximum can only exceed the deepest tracked level through the
  // never-seen-by-n origin, so it bounds the row maximum from above
  CHECK(ps.max_lifetime >= static_cast<std::uint32_t>(top_life));
}

TEST_CASE("waiting time reports an already-satisfied level as zero") {
  const auto wt = waiting_time_to_level(3, 1, 1, 50, 3, 0);
  CHECK(wt.wait == 0);
  CHECK(wt.fresh_site);  // the first step always lands on a fresh site
  CHECK_FALSE(wt.censored);
}

TEST_CASE("waiting time censors unreachable levels") {
  const auto wt = waiting_time_to_level(3, 10, 100, 500, 3, 0);
  CHECK(wt.censored);
  CHECK(wt.wait == 490);
}

TEST_CASE("waiting time validation") {
  CHECK_THROWS_AS(waiting_time_to_level(3, 0, 1, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(waiting_time_to_level(3, 11, 1, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(waiting_time_to_level(3, 1, 0, 10, 1, 0), std::invalid_argument);
}
