#pragma once
// Walk simulation: configuration, the stepping kernel, and a runtime facade
// over the dimension-templated ledger.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "walklab/lattice.hpp"
#include "walklab/ledger.hpp"
#include "walklab/rng.hpp"

namespace walklab {

struct WalkConfig {
  int d = 3;
  std::uint64_t steps = 0;                  // n; local times count visits in [1, n]
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::optional<std::uint64_t> horizon;     // N >= n, lifetime proxy horizon
};

// Steps are indexed from 1 and the time-0 origin occupancy is not a visit;
// kernels rely on coordinates fitting int32, hence the hard step cap.
inline void validate(const WalkConfig& cfg) {
  check_dim(cfg.d, 3);
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (cfg.steps >= (1ull << 31))
    throw std::invalid_argument("steps must be below 2^31 (site coordinates are int32)");
  if (cfg.horizon) {
    if (*cfg.horizon < cfg.steps)
      throw std::invalid_argument("horizon must be >= steps");
    if (*cfg.horizon >= (1ull << 31))
      throw std::invalid_argument("horizon must be below 2^31");
  }
}

// Public facade over the derived streams: uniform directions in [0, 2d).
// Direction r encodes axis r>>1 and displacement +1 for even r.
struct StepSource {
  StepSource(int d, std::uint64_t seed, std::uint64_t replica,
             std::uint64_t purpose_tag = purpose::kWalk)
      : gen_(make_stream(seed, replica, purpose_tag)), directions_(2 * d) {
    check_dim(d);
  }
  unsigned next() { return static_cast<unsigned>(uniform_below(gen_, directions_)); }
  unsigned directions() const { return directions_; }

 private:
  Xoshiro256pp gen_;
  unsigned directions_;
};

template <int D>
struct StepEvent {
  std::uint64_t index;   // 1-based
  const Site<D>& pos;
  bool new_site;         // first visit (time 0 does not count for the origin)
  std::uint32_t count;   // local time at pos after this step
};

// Simulates n steps, feeding every step to the visitor.
template <int D, class Visitor>
Ledger<D> simulate_walk(std::uint64_t n, std::uint64_t seed, std::uint64_t replica,
                        Visitor&& visit, std::uint64_t purpose_tag = purpose::kWalk) {
  auto rng = make_stream(seed, replica, purpose_tag);
  // roughly gamma*n distinct sites for d >= 3; over-reserve mildly
  Ledger<D> led(static_cast<std::size_t>(n < 64 ? 64 : n * 3 / 4));
  Site<D> pos{};
  for (std::uint64_t i = 1; i <= n; ++i) {
    const auto r = static_cast<unsigned>(uniform_below(rng, 2 * D));
    apply_step<D>(pos, r);
    const std::uint32_t c = led.record_visit(pos);
    visit(StepEvent<D>{i, pos, c == 1, c});
  }
  return led;
}

template <int D>
Ledger<D> simulate_walk(std::uint64_t n, std::uint64_t seed, std::uint64_t replica,
                        std::uint64_t purpose_tag = purpose::kWalk) {
  return simulate_walk<D>(n, seed, replica, [](const StepEvent<D>&) {}, purpose_tag);
}

// Runtime view of a finished walk's ledger.
class LocalTimeLedger {
 public:
  int dim() const;
  std::uint64_t steps() const;
  std::uint64_t distinct_sites() const;
  // histogram[k] = sites visited exactly k times; histogram[0] == 0
  std::vector<std::int64_t> histogram() const;
  std::uint64_t local_time(const LatticePoint& x) const;
  std::uint32_t max_count() const;
  // ties broken by lexicographically smallest witness; throws on empty walk
  std::pair<std::uint64_t, LatticePoint> max_local_time() const;

  struct Impl;
  explicit LocalTimeLedger(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

LocalTimeLedger simulate(const WalkConfig& cfg);

using StepCallback =
    std::function<void(std::uint64_t index, const LatticePoint& pos, bool new_site,
                       std::uint64_t count)>;
LocalTimeLedger simulate_with_callback(const WalkConfig& cfg, const StepCallback& cb);

// Debug dump: one line "i x_1 ... x_d" per step.
void write_trajectory(const WalkConfig& cfg, std::ostream& os);

}  // namespace walklab
