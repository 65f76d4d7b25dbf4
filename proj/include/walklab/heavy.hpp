#pragma once
// Heavy-site statistics: per-level occupation counts at the walk horizon n
// combined with lifetime proxies read off at a longer horizon N, the waiting
// time for a site to accumulate a given occupation, and the threshold
// calculus used to pick the critical level.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "walklab/lattice.hpp"
#include "walklab/rng.hpp"

namespace walklab {

// expected fraction-per-step constants
double mu_of(double gamma, int t);     // gamma * (1-gamma)^(t-1), t >= 1
double lambda_of(double gamma);        // -1 / log(1 - gamma)

struct ThresholdParams {
  double gamma = 0.0;
  double b = 3.0;  // log-log coefficient
};

// lambda * log n - lambda * b * log log n  (natural logs, n >= 2)
double threshold_psi(const ThresholdParams& p, std::uint64_t n);
// floor of psi clamped to >= 1
int threshold_level(const ThresholdParams& p, std::uint64_t n);

struct HeavyLevelRow {
  int t = 0;
  std::int64_t exact_n = 0;          // sites with exactly t visits by n
  std::int64_t lifetime_exact = 0;   // sites visited by n with exactly t visits by N
  std::int64_t at_least_n = 0;       // sites with at least t visits by n
  std::int64_t lifetime_at_least = 0;  // sites visited by n with at least t visits by N
  std::int64_t deficit = 0;          // lifetime_at_least - at_least_n
};

struct HeavyCounts {
  int d = 0;
  std::uint64_t n = 0, horizon = 0;  // horizon = N >= n
  std::uint64_t seed = 0, replica = 0;
  std::uint64_t distinct_by_n = 0;
  std::vector<HeavyLevelRow> rows;   // t = 1 .. max observed level

  const HeavyLevelRow& level(int t) const {
    if (t < 1 || t > static_cast<int>(rows.size()))
      throw std::out_of_range("level out of range");
    return rows[t - 1];
  }
  int max_level() const { return static_cast<int>(rows.size()); }
};

// Two-phase run: simulate to n with full bookkeeping, then extend to N while
// accumulating only on sites already seen, so memory scales with the sites of
// the short horizon.  Counts at N over those sites are the lifetime proxies.
HeavyCounts heavy_counts(int d, std::uint64_t n, std::uint64_t big_n, std::uint64_t seed,
                         std::uint64_t replica, std::uint64_t purpose_tag = purpose::kHeavy);

struct PathMaxStats {
  int d = 0;
  std::uint64_t n = 0, horizon = 0;
  std::uint64_t seed = 0, replica = 0;
  std::uint32_t max_by_n = 0;      // largest occupation among sites at time n
  std::uint32_t max_lifetime = 0;  // largest occupation at N over sites seen by n
                                   // (the time-0 origin included)
};

PathMaxStats path_max_stats(int d, std::uint64_t n, std::uint64_t big_n, std::uint64_t seed,
                            std::uint64_t replica,
                            std::uint64_t purpose_tag = purpose::kLimits);

struct WaitingTime {
  std::uint64_t step = 0;   // the inspected step i
  int level = 0;            // target occupation t
  bool fresh_site = false;  // site at step i was first visited at i
  bool censored = false;    // level not reached by the horizon
  std::uint64_t wait = 0;   // steps from i until the site's count reaches t
};

// Waiting time for the site occupied at step i to reach t total visits.
WaitingTime waiting_time_to_level(int d, std::uint64_t i, int t, std::uint64_t horizon,
                                  std::uint64_t seed, std::uint64_t replica);

}  // namespace walklab
