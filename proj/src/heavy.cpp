#include "walklab/heavy.hpp"

#include <cmath>

#include "walklab/ledger.hpp"
#include "walklab/walk.hpp"

namespace walklab {

double mu_of(double gamma, int t) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("escape probability must be in (0,1)");
  if (t < 1) throw std::invalid_argument("level must be >= 1");
  return gamma * std::pow(1.0 - gamma, t - 1);
}

double lambda_of(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("escape probability must be in (0,1)");
  return -1.0 / std::log1p(-gamma);
}

double threshold_psi(const ThresholdParams& p, std::uint64_t n) {
  if (!(p.gamma > 0.0 && p.gamma < 1.0))
    throw std::invalid_argument("escape probability must be in (0,1)");
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  const double lam = lambda_of(p.gamma);
  const double ln = std::log(static_cast<double>(n));
  return lam * ln - lam * p.b * std::log(ln);
}

int threshold_level(const ThresholdParams& p, std::uint64_t n) {
  const double psi = threshold_psi(p, n);
  if (psi < 1.0) return 1;
  return static_cast<int>(std::floor(psi));
}

namespace {

void check_two_phase(int d, std::uint64_t n, std::uint64_t big_n) {
  check_dim(d, 3);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (big_n < n) throw std::invalid_argument("lifetime horizon must be >= n");
  if (big_n >= (1ull << 31))
    throw std::invalid_argument("horizon must be below 2^31 (int32 coordinates)");
}

// ledger at n plus counts at N over the sites tracked at n
template <int D>
struct TwoPhase {
  Ledger<D> led;
  std::vector<std::int64_t> bins_at_n;  // histogram snapshot at time n
  std::uint64_t distinct_at_n = 0;
  std::uint32_t origin_extra = 0;  // origin visits in (n, N] if unseen by n

  TwoPhase(std::uint64_t n, std::uint64_t big_n, std::uint64_t seed,
           std::uint64_t replica, std::uint64_t purpose_tag)
      : led(static_cast<std::size_t>(n < 64 ? 64 : n * 3 / 4)) {
    auto rng = make_stream(seed, replica, purpose_tag);
    Site<D> pos{};
    for (std::uint64_t i = 1; i <= n; ++i) {
      const auto r = static_cast<unsigned>(uniform_below(rng, 2 * D));
      apply_step<D>(pos, r);
      led.record_visit(pos);
    }
    bins_at_n = led.histogram().bins();
    distinct_at_n = led.distinct_sites();
    const Site<D> origin{};
    const bool origin_tracked = led.local_time(origin) > 0;
    for (std::uint64_t i = n + 1; i <= big_n; ++i) {
      const auto r = static_cast<unsigned>(uniform_below(rng, 2 * D));
      apply_step<D>(pos, r);
      led.record_if_tracked(pos);
      if (!origin_tracked && pos == origin) ++origin_extra;
    }
  }
};

}  // namespace

HeavyCounts heavy_counts(int d, std::uint64_t n, std::uint64_t big_n, std::uint64_t seed,
                         std::uint64_t replica, std::uint64_t purpose_tag) {
  check_two_phase(d, n, big_n);
  HeavyCounts out;
  out.d = d;
  out.n = n;
  out.horizon = big_n;
  out.seed = seed;
  out.replica = replica;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    TwoPhase<D> tp(n, big_n, seed, replica, purpose_tag);
    out.distinct_by_n = tp.distinct_at_n;

    const auto& bins_n = tp.bins_at_n;
    const auto& bins_big = tp.led.histogram().bins();  // counts at N, tracked sites
    const int tmax = static_cast<int>(
        std::max(bins_n.size(), bins_big.size())) - 1;
    out.rows.assign(tmax > 0 ? tmax : 0, HeavyLevelRow{});
    for (int t = 1; t <= tmax; ++t) {
      auto& row = out.rows[t - 1];
      row.t = t;
      row.exact_n = t < static_cast<int>(bins_n.size()) ? bins_n[t] : 0;
      row.lifetime_exact = t < static_cast<int>(bins_big.size()) ? bins_big[t] : 0;
    }
    // suffix sums
    std::int64_t acc_n = 0, acc_big = 0;
    for (int t = tmax; t >= 1; --t) {
      auto& row = out.rows[t - 1];
      acc_n += row.exact_n;
      acc_big += row.lifetime_exact;
      row.at_least_n = acc_n;
      row.lifetime_at_least = acc_big;
      row.deficit = row.lifetime_at_least - row.at_least_n;
    }
    return 0;
  });
  return out;
}

PathMaxStats path_max_stats(int d, std::uint64_t n, std::uint64_t big_n, std::uint64_t seed,
                            std::uint64_t replica, std::uint64_t purpose_tag) {
  check_two_phase(d, n, big_n);
  PathMaxStats out;
  out.d = d;
  out.n = n;
  out.horizon = big_n;
  out.seed = seed;
  out.replica = replica;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    TwoPhase<D> tp(n, big_n, seed, replica, purpose_tag);
    std::uint32_t max_n = 0;
    for (std::size_t k = 1; k < tp.bins_at_n.size(); ++k)
      if (tp.bins_at_n[k] > 0) max_n = static_cast<std::uint32_t>(k);
    out.max_by_n = max_n;
    // sites seen by n carry their N-counts; the walk's starting site counts
    // even when its first visit is after n
    out.max_lifetime = std::max(tp.led.histogram().max_count(), tp.origin_extra);
    return 0;
  });
  return out;
}

WaitingTime waiting_time_to_level(int d, std::uint64_t i, int t, std::uint64_t horizon,
                                  std::uint64_t seed, std::uint64_t replica) {
  check_dim(d, 3);
  if (i < 1 || i > horizon) throw std::invalid_argument("need 1 <= i <= horizon");
  if (t < 1) throw std::invalid_argument("level must be >= 1");
  if (horizon >= (1ull << 31)) throw std::invalid_argument("horizon must be below 2^31");
  WaitingTime out;
  out.step = i;
  out.level = t;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    auto rng = make_stream(seed, replica, purpose::kWalk);
    Ledger<D> led(1 << 12);
    Site<D> pos{};
    Site<D> marked{};
    std::uint32_t marked_count = 0;
    for (std::uint64_t step = 1; step <= horizon; ++step) {
      const auto r = static_cast<unsigned>(uniform_below(rng, 2 * D));
      apply_step<D>(pos, r);
      const std::uint32_t c = led.record_visit(pos);
      if (step == i) {
        marked = pos;
        marked_count = c;
        out.fresh_site = c == 1;
        if (marked_count >= static_cast<std::uint32_t>(t)) {
          out.wait = 0;
          return 0;
        }
      } else if (step > i && pos == marked) {
        marked_count = c;
        if (marked_count == static_cast<std::uint32_t>(t)) {
          out.wait = step - i;
          return 0;
        }
      }
    }
    out.censored = true;
    out.wait = horizon - i;
    return 0;
  });
  return out;
}

}  // namespace walklab
