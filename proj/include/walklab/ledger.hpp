#pragma once
// Occupation bookkeeping.  SiteMap is an open-addressed hash map from lattice
// sites to visit counts; CountHistogram maintains the counts-of-counts profile
// incrementally so "number of sites visited exactly k times" is O(1) at any
// point of a run.
//
// Invariants kept exact at all times (checked in tests):
//   sum_k k * hist[k] == recorded steps
//   sum_k hist[k]     == distinct sites

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "walklab/lattice.hpp"
#include "walklab/rng.hpp"

namespace walklab {

class CountHistogram {
 public:
  // old_count == 0 means a site was just created
  void bump(std::uint32_t old_count, std::uint32_t new_count) {
    if (new_count >= bins_.size()) bins_.resize(new_count + 1, 0);
    if (old_count > 0) --bins_[old_count];
    ++bins_[new_count];
    if (new_count > high_) high_ = new_count;
  }
  std::int64_t at(std::uint32_t k) const {
    return k < bins_.size() ? bins_[k] : 0;
  }
  const std::vector<std::int64_t>& bins() const { return bins_; }
  // largest k with a nonzero bin; 0 when empty
  std::uint32_t max_count() const {
    std::uint32_t k = high_;
    while (k > 0 && bins_[k] == 0) --k;
    return k;
  }

 private:
  std::vector<std::int64_t> bins_{0};  // bins_[0] unused, stays 0
  std::uint32_t high_ = 0;
};

template <int D>
class SiteMap {
 public:
  using Key = Site<D>;

  explicit SiteMap(std::size_t expected = 16) {
    std::size_t cap = 16;
    while (cap * 5 < expected * 8) cap <<= 1;  // target load <= 0.625
    slots_.assign(cap, empty_slot());
    mask_ = cap - 1;
    grow_at_ = cap * 5 / 8;
  }

  // returns the count after insertion/increment
  std::uint32_t increment(const Key& k) {
    Slot* s = probe(k);
    if (s->key[0] == kEmptyTag) {
      if (size_ + 1 > grow_at_) {
        grow();
        s = probe(k);
      }
      s->key = k;
      s->count = 1;
      ++size_;
      return 1;
    }
    return ++s->count;
  }

  // increments only if the site is already tracked; returns new count or 0
  std::uint32_t increment_if_present(const Key& k) {
    Slot* s = probe(k);
    if (s->key[0] == kEmptyTag) return 0;
    return ++s->count;
  }

  std::uint32_t count(const Key& k) const {
    const Slot* s = probe(k);
    return s->key[0] == kEmptyTag ? 0 : s->count;
  }

  std::size_t size() const { return size_; }

  template <class F>
  void for_each(F&& f) const {
    for (const Slot& s : slots_)
      if (s.key[0] != kEmptyTag) f(s.key, s.count);
  }

 private:
  // coordinates never reach INT32_MIN (|coord| <= steps < 2^31), so it can tag
  // empty slots without a separate occupancy array
  static constexpr std::int32_t kEmptyTag = INT32_MIN;

  struct Slot {
    Key key;
    std::uint32_t count;
  };

  static Slot empty_slot() {
    Slot s{};
    s.key[0] = kEmptyTag;
    s.count = 0;
    return s;
  }

  static std::uint64_t hash(const Key& k) {
    std::uint64_t h = 0x6a09e667f3bcc909ull ^ (D * 0x9E3779B97F4A7C15ull);
    for (int i = 0; i < D; ++i)
      h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(k[i])));
    return h;
  }

  Slot* probe(const Key& k) {
    std::size_t i = hash(k) & mask_;
    while (true) {
      Slot& s = slots_[i];
      if (s.key[0] == kEmptyTag || s.key == k) return &s;
      i = (i + 1) & mask_;
    }
  }
  const Slot* probe(const Key& k) const {
    return const_cast<SiteMap*>(this)->probe(k);
  }

  void grow() {
    std::vector<Slot> old;
    old.swap(slots_);
    const std::size_t cap = (mask_ + 1) << 1;
    slots_.assign(cap, empty_slot());
    mask_ = cap - 1;
    grow_at_ = cap * 5 / 8;
    for (const Slot& s : old) {
      if (s.key[0] == kEmptyTag) continue;
      std::size_t i = hash(s.key) & mask_;
      while (slots_[i].key[0] != kEmptyTag) i = (i + 1) & mask_;
      slots_[i] = s;
    }
  }

  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
  std::size_t grow_at_ = 0;
};

// Site counts plus the live histogram for one walk.
template <int D>
class Ledger {
 public:
  explicit Ledger(std::size_t expected_sites = 16) : map_(expected_sites) {}

  std::uint32_t record_visit(const Site<D>& x) {
    const std::uint32_t c = map_.increment(x);
    hist_.bump(c - 1, c);
    ++steps_;
    return c;
  }

  // phase-2 recording: only sites already tracked accumulate; steps() counts
  // recorded visits, so the histogram invariants stay exact
  std::uint32_t record_if_tracked(const Site<D>& x) {
    const std::uint32_t c = map_.increment_if_present(x);
    if (c > 0) {
      hist_.bump(c - 1, c);
      ++steps_;
    }
    return c;
  }

  std::uint64_t steps() const { return steps_; }
  std::uint64_t distinct_sites() const { return map_.size(); }
  std::uint32_t local_time(const Site<D>& x) const { return map_.count(x); }
  const CountHistogram& histogram() const { return hist_; }
  const SiteMap<D>& sites() const { return map_; }

  // max count with the lexicographically smallest witness
  std::pair<std::uint32_t, Site<D>> max_local_time() const {
    if (steps_ == 0) throw std::logic_error("max_local_time on empty ledger");
    const std::uint32_t m = hist_.max_count();
    Site<D> best{};
    bool found = false;
    map_.for_each([&](const Site<D>& k, std::uint32_t c) {
      if (c == m && (!found || k < best)) {
        best = k;
        found = true;
      }
    });
    return {m, best};
  }

  bool consistent() const {
    std::int64_t mass = 0, sites = 0;
    const auto& b = hist_.bins();
    for (std::size_t k = 1; k < b.size(); ++k) {
      mass += static_cast<std::int64_t>(k) * b[k];
      sites += b[k];
    }
    return mass == static_cast<std::int64_t>(steps_) &&
           sites == static_cast<std::int64_t>(map_.size());
  }

 private:
  SiteMap<D> map_;
  CountHistogram hist_;
  std::uint64_t steps_ = 0;
};

}  // namespace walklab
