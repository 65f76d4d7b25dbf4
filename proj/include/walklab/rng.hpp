#pragma once
// Deterministic random streams for all simulation kernels.
//
// Stream contract (frozen; golden values pinned in the unit tests):
//   stream(seed, replica, purpose) = xoshiro256++ whose four state words are
//   successive splitmix64 outputs of
//     h = mix(seed ^ (purpose * 0xA24BAED4963EE407 + 0x9E3779B97F4A7C15))
//     h = mix(h    ^ (replica * 0x9FB21C651E98DF25 + 0xBF58476D1CE4E5B9))
//   with mix = the splitmix64 finalizer.
//
// Same (seed, replica, purpose) always reproduces the same path on every
// platform; that is what couples an estimate across horizons (one replica,
// one trajectory, inspected at several n).  Distinct purposes decorrelate
// unrelated experiment families sharing a master seed.

#include <array>
#include <bit>
#include <cstdint>

namespace walklab {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  std::uint64_t state;
  constexpr std::uint64_t next() { return mix64(state += 0x9E3779B97F4A7C15ull); }
};

class Xoshiro256pp {
 public:
  explicit constexpr Xoshiro256pp(std::uint64_t seed) : s_{} {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
  }

  constexpr std::uint64_t next() {
    const std::uint64_t out = std::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return out;
  }

  // uniform on [0,1) with 53 random bits
  double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

 private:
  std::array<std::uint64_t, 4> s_;
};

// Purpose tags; one per experiment family.
namespace purpose {
inline constexpr std::uint64_t kWalk = 1;        // generic ledger walks
inline constexpr std::uint64_t kReturnTime = 2;  // escape probability runs
inline constexpr std::uint64_t kHitting = 3;     // races / target avoidance
inline constexpr std::uint64_t kOccupation = 4;  // occupation-law ensembles
inline constexpr std::uint64_t kHeavy = 5;       // heavy-site count runs
inline constexpr std::uint64_t kLimits = 7;      // max-local-time runs
inline constexpr std::uint64_t kVariance = 8;    // variance diagnostic runs
}  // namespace purpose

constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t replica,
                                           std::uint64_t purpose_tag) {
  std::uint64_t h = master;
  h = mix64(h ^ (purpose_tag * 0xA24BAED4963EE407ull + 0x9E3779B97F4A7C15ull));
  h = mix64(h ^ (replica * 0x9FB21C651E98DF25ull + 0xBF58476D1CE4E5B9ull));
  return h;
}

constexpr Xoshiro256pp make_stream(std::uint64_t master, std::uint64_t replica,
                                   std::uint64_t purpose_tag) {
  return Xoshiro256pp(derive_stream_seed(master, replica, purpose_tag));
}

// Unbiased draw from [0, bound); Lemire rejection.  bound >= 1.
inline std::uint64_t uniform_below(Xoshiro256pp& g, std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>(g.next()) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t cutoff = (0 - bound) % bound;
    while (lo < cutoff) {
      m = static_cast<unsigned __int128>(g.next()) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace walklab
