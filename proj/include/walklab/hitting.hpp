#pragma once
// First-passage and occupation experiments: escape probability estimates,
// two-point races, occupation-law histograms, and identity residual checks.
//
// All estimators are frequency counts over independent replicas; standard
// errors are binomial unless a coupled ensemble supplies a full covariance.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "walklab/lattice.hpp"
#include "walklab/stats.hpp"

namespace walklab {

struct EscapeEstimate {
  int d = 0;
  std::uint64_t horizon = 0;   // steps inspected per replica
  std::uint64_t replicas = 0;
  double value = 0.0;          // fraction of replicas with no return / no hit
  double std_error = 0.0;
  // truncation bias is positive and of order horizon^bias_exponent
  double bias_exponent = 0.0;  // 1 - d/2
};

// P(no return to the origin during steps 1..n-1); exact finite-time quantity,
// no truncation bias.  n = 1 gives 1 by convention.
EscapeEstimate escape_by(int d, std::uint64_t n, std::uint64_t replicas, std::uint64_t seed);

// Escape probability estimate: fraction of replicas that never return within
// `horizon` steps.  horizon >= 100.
EscapeEstimate escape_estimate(int d, std::uint64_t horizon, std::uint64_t replicas,
                               std::uint64_t seed);

// Fraction of replicas that never visit x within `horizon` steps.
EscapeEstimate target_avoidance(int d, const LatticePoint& x, std::uint64_t horizon,
                                std::uint64_t replicas, std::uint64_t seed);

struct HittingOutcome {
  enum class Kind { kReturnFirst, kTargetFirst, kCensored };
  Kind kind = Kind::kCensored;
  std::uint64_t time = 0;  // hitting time; = horizon when censored
};

struct RaceEstimate {
  int d = 0;
  LatticePoint target;
  std::uint64_t horizon = 0, replicas = 0;
  std::int64_t return_first = 0, target_first = 0, censored = 0;
  double q = 0.0, s = 0.0;  // P(return first), P(target first), truncated
  double q_se = 0.0, s_se = 0.0;
  double censored_fraction = 0.0;
};

// Race between first return to the origin and first visit to x.
RaceEstimate race_estimate(int d, const LatticePoint& x, std::uint64_t horizon,
                           std::uint64_t replicas, std::uint64_t seed);

struct OccupationHistogram {
  int d = 0;
  std::uint64_t horizon = 0, replicas = 0;
  std::uint64_t censored = 0;               // replicas with no recorded value
  std::vector<std::int64_t> counts;         // counts[j] = replicas with value j
  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

struct OccupationLawReport {
  OccupationHistogram hist;
  double geom_ratio = 0.0;  // expected geometric ratio used for the fit, 0 = none
  std::optional<GofResult> gof;
};

// Law of the origin local time at `horizon`.  When expected_ratio is given, a
// chi-square fit against the geometric law with that ratio is attached.
OccupationLawReport origin_occupation_law(int d, std::uint64_t horizon,
                                          std::uint64_t replicas, std::uint64_t seed,
                                          std::optional<double> expected_ratio = {});

// Law of the total occupation of the pair {origin, x} at `horizon` (origin
// time-0 occupancy not counted).
OccupationLawReport pair_occupation_law(int d, const LatticePoint& x, std::uint64_t horizon,
                                        std::uint64_t replicas, std::uint64_t seed,
                                        std::optional<double> expected_ratio = {});

// Law of the number of visits to x strictly before the first return to the
// origin, restricted to replicas that do return; non-returners are censored.
OccupationLawReport visits_before_return_law(int d, const LatticePoint& x,
                                             std::uint64_t horizon, std::uint64_t replicas,
                                             std::uint64_t seed);

// One coupled ensemble serving the escape estimate, the avoidance estimates,
// and the races for several targets at once: every replica trajectory is
// inspected for all events.  The covariance of the four estimates per target
// is estimated from the joint outcome counts, so identity residuals get exact
// delta-method errors despite the coupling.
struct CoupledPairEstimates {
  int d = 0;
  LatticePoint target;
  std::uint64_t horizon = 0, replicas = 0;
  double gamma = 0.0;    // no return within horizon
  double gamma_x = 0.0;  // target not hit within horizon
  double q = 0.0;        // return strictly before target hit
  double s = 0.0;        // target hit strictly before return
  double race_censored_fraction = 0.0;
  // covariance of the estimators (gamma, gamma_x, q, s), row-major, already
  // divided by the replica count
  std::array<double, 16> cov{};
};

std::vector<CoupledPairEstimates> coupled_hitting_estimates(
    int d, const std::vector<LatticePoint>& targets, std::uint64_t horizon,
    std::uint64_t replicas, std::uint64_t seed);

struct HittingRates {
  double gamma = 0.0, gamma_se = 0.0;
  double gamma_x = 0.0, gamma_x_se = 0.0;
  double q = 0.0, q_se = 0.0;
  double s = 0.0, s_se = 0.0;
  // optional covariance of (gamma, gamma_x, q, s); diagonal of SEs otherwise
  std::optional<std::array<double, 16>> cov;

  static HittingRates from_coupled(const CoupledPairEstimates& c);
};

struct IdentityResidual {
  std::string name;
  double residual = 0.0;
  double se = 0.0;
  double z = 0.0;  // residual / se, 0 when both vanish
};

// Residuals of the four first-passage identities linking (gamma, gamma_x, q, s);
// exact inputs give residuals at rounding level with zero SEs.
std::vector<IdentityResidual> identity_residuals(const HittingRates& rates);

}  // namespace walklab
