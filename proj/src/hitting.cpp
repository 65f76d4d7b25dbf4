#include "walklab/hitting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "walklab/rng.hpp"

namespace walklab {
namespace {

template <int D>
inline void step(Site<D>& p, Xoshiro256pp& g) {
  const auto r = static_cast<unsigned>(uniform_below(g, 2 * D));
  apply_step<D>(p, r);
}

template <int D>
inline std::int32_t linf_between(const Site<D>& p, const Site<D>& q) {
  std::int32_t m = 0;
  for (int i = 0; i < D; ++i) {
    std::int32_t dd = p[i] - q[i];
    if (dd < 0) dd = -dd;
    if (dd > m) m = dd;
  }
  return m;
}

// First visit times (1-based step index, 0 = not hit) to K fixed watch points
// within `horizon` steps, stopping once `stop_after` points have been hit.
// While every unresolved point is at L-inf distance g > 1 the next g-1 steps
// cannot produce a hit (the distance drops by at most one per step), so the
// walk advances without comparisons; this is exact, not an approximation.
template <int D, std::size_t K>
std::array<std::uint64_t, K> first_passage_times(Xoshiro256pp& g, std::uint64_t horizon,
                                                 const std::array<Site<D>, K>& watch,
                                                 unsigned stop_after = K) {
  std::array<std::uint64_t, K> t{};
  std::array<bool, K> hit{};
  unsigned resolved = 0;
  Site<D> p{};
  std::uint64_t i = 0;
  while (i < horizon && resolved < stop_after) {
    std::int32_t dist = std::numeric_limits<std::int32_t>::max();
    for (std::size_t k = 0; k < K; ++k)
      if (!hit[k]) dist = std::min(dist, linf_between<D>(p, watch[k]));
    if (dist > 1) {
      const std::uint64_t blind = std::min<std::uint64_t>(dist - 1, horizon - i);
      for (std::uint64_t b = 0; b < blind; ++b) step<D>(p, g);
      i += blind;
      continue;
    }
    step<D>(p, g);
    ++i;
    for (std::size_t k = 0; k < K; ++k) {
      if (!hit[k] && p == watch[k]) {
        hit[k] = true;
        t[k] = i;
        ++resolved;
      }
    }
  }
  return t;
}

template <int D, std::size_t K>
struct VisitCount {
  std::array<std::uint64_t, K> visits{};
  bool stopped_early = false;
};

// Visit counts to the watch points over `horizon` steps; with stop_slot >= 0
// the run ends right after the first visit to that point.
template <int D, std::size_t K>
VisitCount<D, K> count_visits(Xoshiro256pp& g, std::uint64_t horizon,
                              const std::array<Site<D>, K>& watch, int stop_slot = -1) {
  VisitCount<D, K> out;
  Site<D> p{};
  std::uint64_t i = 0;
  while (i < horizon) {
    std::int32_t dist = std::numeric_limits<std::int32_t>::max();
    for (std::size_t k = 0; k < K; ++k)
      dist = std::min(dist, linf_between<D>(p, watch[k]));
    if (dist > 1) {
      const std::uint64_t blind = std::min<std::uint64_t>(dist - 1, horizon - i);
      for (std::uint64_t b = 0; b < blind; ++b) step<D>(p, g);
      i += blind;
      continue;
    }
    step<D>(p, g);
    ++i;
    for (std::size_t k = 0; k < K; ++k) {
      if (p == watch[k]) {
        ++out.visits[k];
        if (static_cast<int>(k) == stop_slot) {
          out.stopped_early = true;
          return out;
        }
      }
    }
  }
  return out;
}

void check_mc_args(int d, std::uint64_t replicas) {
  check_dim(d, 3);
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
}

template <int D>
Site<D> target_site(const LatticePoint& x, bool allow_origin = false) {
  if (!allow_origin && x.is_origin())
    throw std::invalid_argument("target must differ from the origin");
  return to_site<D>(x);
}

void grow_to(std::vector<std::int64_t>& v, std::size_t j) {
  if (j >= v.size()) v.resize(j + 1, 0);
}

}  // namespace

EscapeEstimate escape_by(int d, std::uint64_t n, std::uint64_t replicas, std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const std::uint64_t horizon = n - 1;
  std::int64_t returned = 0;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const std::array<Site<D>, 1> watch{Site<D>{}};
    for (std::uint64_t rep = 0; rep < replicas; ++rep) {
      auto g = make_stream(seed, rep, purpose::kReturnTime);
      returned += first_passage_times<D, 1>(g, horizon, watch)[0] > 0 ? 1 : 0;
    }
    return 0;
  });
  EscapeEstimate est;
  est.d = d;
  est.horizon = horizon;
  est.replicas = replicas;
  est.value = 1.0 - static_cast<double>(returned) / static_cast<double>(replicas);
  est.std_error = binomial_se(est.value, replicas);
  est.bias_exponent = 0.0;  // exact finite-n quantity
  return est;
}

EscapeEstimate escape_estimate(int d, std::uint64_t horizon, std::uint64_t replicas,
                               std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (horizon < 100) throw std::invalid_argument("horizon must be >= 100");
  EscapeEstimate est = escape_by(d, horizon + 1, replicas, seed);
  est.bias_exponent = 1.0 - d / 2.0;  // estimate exceeds the limit by O(h^(1-d/2))
  return est;
}

EscapeEstimate target_avoidance(int d, const LatticePoint& x, std::uint64_t horizon,
                                std::uint64_t replicas, std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (x.dim() != d) throw std::invalid_argument("target dimension mismatch");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::int64_t hits = 0;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const std::array<Site<D>, 1> watch{target_site<D>(x)};
    for (std::uint64_t rep = 0; rep < replicas; ++rep) {
      auto g = make_stream(seed, rep, purpose::kHitting);
      hits += first_passage_times<D, 1>(g, horizon, watch)[0] > 0 ? 1 : 0;
    }
    return 0;
  });
  EscapeEstimate est;
  est.d = d;
  est.horizon = horizon;
  est.replicas = replicas;
  est.value = 1.0 - static_cast<double>(hits) / static_cast<double>(replicas);
  est.std_error = binomial_se(est.value, replicas);
  est.bias_exponent = 1.0 - d / 2.0;
  return est;
}

RaceEstimate race_estimate(int d, const LatticePoint& x, std::uint64_t horizon,
                           std::uint64_t replicas, std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (x.dim() != d) throw std::invalid_argument("target dimension mismatch");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  RaceEstimate est;
  est.d = d;
  est.target = x;
  est.horizon = horizon;
  est.replicas = replicas;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const std::array<Site<D>, 2> watch{Site<D>{}, target_site<D>(x)};
    for (std::uint64_t rep = 0; rep < replicas; ++rep) {
      auto g = make_stream(seed, rep, purpose::kHitting);
      const auto t = first_passage_times<D, 2>(g, horizon, watch, 1);
      if (t[0] > 0)
        ++est.return_first;
      else if (t[1] > 0)
        ++est.target_first;
      else
        ++est.censored;
    }
    return 0;
  });
  const double r = static_cast<double>(replicas);
  est.q = est.return_first / r;
  est.s = est.target_first / r;
  est.q_se = binomial_se(est.q, replicas);
  est.s_se = binomial_se(est.s, replicas);
  est.censored_fraction = est.censored / r;
  return est;
}

namespace {

template <int D>
OccupationLawReport occupation_law_impl(int d, const std::array<Site<D>, 1>& watch,
                                        std::uint64_t horizon, std::uint64_t replicas,
                                        std::uint64_t seed,
                                        std::optional<double> expected_ratio) {
  OccupationLawReport rep;
  rep.hist.d = d;
  rep.hist.horizon = horizon;
  rep.hist.replicas = replicas;
  for (std::uint64_t r = 0; r < replicas; ++r) {
    auto g = make_stream(seed, r, purpose::kOccupation);
    const auto v = count_visits<D, 1>(g, horizon, watch);
    grow_to(rep.hist.counts, v.visits[0]);
    ++rep.hist.counts[v.visits[0]];
  }
  if (expected_ratio) {
    rep.geom_ratio = *expected_ratio;
    rep.gof = chi_square_geometric(rep.hist.counts, replicas, *expected_ratio);
  }
  return rep;
}

template <int D>
OccupationLawReport pair_law_impl(int d, const Site<D>& x, std::uint64_t horizon,
                                  std::uint64_t replicas, std::uint64_t seed,
                                  std::optional<double> expected_ratio) {
  OccupationLawReport rep;
  rep.hist.d = d;
  rep.hist.horizon = horizon;
  rep.hist.replicas = replicas;
  const std::array<Site<D>, 2> watch{Site<D>{}, x};
  for (std::uint64_t r = 0; r < replicas; ++r) {
    auto g = make_stream(seed, r, purpose::kOccupation);
    const auto v = count_visits<D, 2>(g, horizon, watch);
    const std::uint64_t j = v.visits[0] + v.visits[1];
    grow_to(rep.hist.counts, j);
    ++rep.hist.counts[j];
  }
  if (expected_ratio) {
    rep.geom_ratio = *expected_ratio;
    rep.gof = chi_square_geometric(rep.hist.counts, replicas, *expected_ratio);
  }
  return rep;
}

}  // namespace

OccupationLawReport origin_occupation_law(int d, std::uint64_t horizon,
                                          std::uint64_t replicas, std::uint64_t seed,
                                          std::optional<double> expected_ratio) {
  check_mc_args(d, replicas);
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  return with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const std::array<Site<D>, 1> watch{Site<D>{}};
    return occupation_law_impl<D>(d, watch, horizon, replicas, seed, expected_ratio);
  });
}

OccupationLawReport pair_occupation_law(int d, const LatticePoint& x, std::uint64_t horizon,
                                        std::uint64_t replicas, std::uint64_t seed,
                                        std::optional<double> expected_ratio) {
  check_mc_args(d, replicas);
  if (x.dim() != d) throw std::invalid_argument("target dimension mismatch");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  return with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    return pair_law_impl<D>(d, target_site<D>(x), horizon, replicas, seed, expected_ratio);
  });
}

OccupationLawReport visits_before_return_law(int d, const LatticePoint& x,
                                             std::uint64_t horizon, std::uint64_t replicas,
                                             std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (x.dim() != d) throw std::invalid_argument("target dimension mismatch");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  OccupationLawReport rep;
  rep.hist.d = d;
  rep.hist.horizon = horizon;
  rep.hist.replicas = replicas;
  with_dim(d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const std::array<Site<D>, 2> watch{Site<D>{}, target_site<D>(x)};
    for (std::uint64_t r = 0; r < replicas; ++r) {
      auto g = make_stream(seed, r, purpose::kOccupation);
      const auto v = count_visits<D, 2>(g, horizon, watch, 0);
      if (!v.stopped_early) {
        ++rep.hist.censored;
        continue;
      }
      grow_to(rep.hist.counts, v.visits[1]);
      ++rep.hist.counts[v.visits[1]];
    }
    return 0;
  });
  return rep;
}

std::vector<CoupledPairEstimates> coupled_hitting_estimates(
    int d, const std::vector<LatticePoint>& targets, std::uint64_t horizon,
    std::uint64_t replicas, std::uint64_t seed) {
  check_mc_args(d, replicas);
  if (targets.empty() || targets.size() > 3)
    throw std::invalid_argument("between 1 and 3 targets");
  for (const auto& x : targets)
    if (x.dim() != d) throw std::invalid_argument("target dimension mismatch");
  if (horizon < 100) throw std::invalid_argument("horizon must be >= 100");
  if (replicas < 2) throw std::invalid_argument("need >= 2 replicas for covariances");

  const std::size_t nt = targets.size();
  // per target: sums of the indicator vector y = (noret, nohit, q, s) and of
  // all pairwise products
  std::vector<std::array<std::int64_t, 4>> sum(nt, std::array<std::int64_t, 4>{});
  std::vector<std::array<std::int64_t, 16>> sum2(nt, std::array<std::int64_t, 16>{});

  auto run = [&](auto dc, auto kc) {
    constexpr int D = decltype(dc)::value;
    constexpr std::size_t K = decltype(kc)::value;  // watch points incl. origin
    std::array<Site<D>, K> watch{};
    for (std::size_t k = 0; k + 1 < K; ++k) watch[k + 1] = target_site<D>(targets[k]);
    for (std::uint64_t rep = 0; rep < replicas; ++rep) {
      auto g = make_stream(seed, rep, purpose::kHitting);
      const auto t = first_passage_times<D, K>(g, horizon, watch);
      const std::uint64_t t0 = t[0];
      for (std::size_t k = 0; k + 1 < K; ++k) {
        const std::uint64_t tx = t[k + 1];
        const bool y[4] = {t0 == 0, tx == 0, t0 > 0 && (tx == 0 || t0 < tx),
                           tx > 0 && (t0 == 0 || tx < t0)};
        for (int a = 0; a < 4; ++a) {
          sum[k][a] += y[a];
          if (y[a])
            for (int b = 0; b < 4; ++b) sum2[k][a * 4 + b] += y[b];
        }
      }
    }
  };
  with_dim(d, [&](auto dc) {
    switch (nt) {
      case 1: run(dc, std::integral_constant<std::size_t, 2>{}); break;
      case 2: run(dc, std::integral_constant<std::size_t, 3>{}); break;
      default: run(dc, std::integral_constant<std::size_t, 4>{}); break;
    }
    return 0;
  });

  std::vector<CoupledPairEstimates> out(nt);
  const double r = static_cast<double>(replicas);
  for (std::size_t k = 0; k < nt; ++k) {
    auto& c = out[k];
    c.d = d;
    c.target = targets[k];
    c.horizon = horizon;
    c.replicas = replicas;
    const double m[4] = {sum[k][0] / r, sum[k][1] / r, sum[k][2] / r, sum[k][3] / r};
    c.gamma = m[0];
    c.gamma_x = m[1];
    c.q = m[2];
    c.s = m[3];
    c.race_censored_fraction = 1.0 - c.q - c.s;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        // unbiased sample covariance of the indicators, then /r for the mean
        const double cab =
            (sum2[k][a * 4 + b] - r * m[a] * m[b]) / (r - 1.0);
        c.cov[a * 4 + b] = cab / r;
      }
  }
  return out;
}

HittingRates HittingRates::from_coupled(const CoupledPairEstimates& c) {
  HittingRates h;
  h.gamma = c.gamma;
  h.gamma_x = c.gamma_x;
  h.q = c.q;
  h.s = c.s;
  h.gamma_se = std::sqrt(std::max(0.0, c.cov[0]));
  h.gamma_x_se = std::sqrt(std::max(0.0, c.cov[5]));
  h.q_se = std::sqrt(std::max(0.0, c.cov[10]));
  h.s_se = std::sqrt(std::max(0.0, c.cov[15]));
  h.cov = c.cov;
  return h;
}

std::vector<IdentityResidual> identity_residuals(const HittingRates& rates) {
  const double g = rates.gamma, gx = rates.gamma_x, q = rates.q, s = rates.s;
  if (!(g > 0 && g < 1) || !(gx > 0 && gx < 1))
    throw std::invalid_argument("escape probabilities must be in (0,1)");
  if (!(q >= 0 && s >= 0 && q + s <= 1))
    throw std::invalid_argument("race probabilities out of range");

  std::array<double, 16> cov{};
  if (rates.cov) {
    cov = *rates.cov;
  } else {
    cov[0] = rates.gamma_se * rates.gamma_se;
    cov[5] = rates.gamma_x_se * rates.gamma_x_se;
    cov[10] = rates.q_se * rates.q_se;
    cov[15] = rates.s_se * rates.s_se;
  }

  const double d1 = gx * (2.0 - gx);  // 1 - (1 - gx)^2
  struct Def {
    const char* name;
    double value;
    double grad[4];  // d/d(gamma, gamma_x, q, s)
  };
  const Def defs[4] = {
      {"return_split", q - 1.0 + g / d1,
       {1.0 / d1, -2.0 * g * (1.0 - gx) / (d1 * d1), 1.0, 0.0}},
      {"crossing_product", s - (1.0 - gx) * (1.0 - q),
       {0.0, 1.0 - q, 1.0 - gx, 1.0}},
      {"race_mass", q + s - 1.0 + g / (2.0 - gx),
       {1.0 / (2.0 - gx), g / ((2.0 - gx) * (2.0 - gx)), 1.0, 1.0}},
      {"return_decomposition", 1.0 - g - q - s * (1.0 - gx),
       {-1.0, s, -1.0, -(1.0 - gx)}},
  };

  std::vector<IdentityResidual> out;
  out.reserve(4);
  for (const auto& def : defs) {
    double var = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) var += def.grad[a] * cov[a * 4 + b] * def.grad[b];
    IdentityResidual res;
    res.name = def.name;
    res.residual = def.value;
    res.se = var > 0 ? std::sqrt(var) : 0.0;
    res.z = res.se > 0 ? res.residual / res.se
                       : (std::abs(res.residual) < 1e-12
                              ? 0.0
                              : std::numeric_limits<double>::infinity());
    out.push_back(res);
  }
  return out;
}

}  // namespace walklab
