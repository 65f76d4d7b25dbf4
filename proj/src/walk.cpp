#include "walklab/walk.hpp"

#include <variant>

namespace walklab {

struct LocalTimeLedger::Impl {
  virtual ~Impl() = default;
  virtual int dim() const = 0;
  virtual std::uint64_t steps() const = 0;
  virtual std::uint64_t distinct_sites() const = 0;
  virtual std::vector<std::int64_t> histogram() const = 0;
  virtual std::uint64_t local_time(const LatticePoint& x) const = 0;
  virtual std::uint32_t max_count() const = 0;
  virtual std::pair<std::uint64_t, LatticePoint> max_local_time() const = 0;
};

namespace {

template <int D>
struct ImplD final : LocalTimeLedger::Impl {
  Ledger<D> led;
  explicit ImplD(Ledger<D> l) : led(std::move(l)) {}

  int dim() const override { return D; }
  std::uint64_t steps() const override { return led.steps(); }
  std::uint64_t distinct_sites() const override { return led.distinct_sites(); }
  std::vector<std::int64_t> histogram() const override { return led.histogram().bins(); }
  std::uint64_t local_time(const LatticePoint& x) const override {
    return led.local_time(to_site<D>(x));
  }
  std::uint32_t max_count() const override { return led.histogram().max_count(); }
  std::pair<std::uint64_t, LatticePoint> max_local_time() const override {
    auto [c, site] = led.max_local_time();
    return {c, to_point<D>(site)};
  }
};

template <int D>
LocalTimeLedger wrap(Ledger<D> led) {
  return LocalTimeLedger(std::make_shared<ImplD<D>>(std::move(led)));
}

}  // namespace

int LocalTimeLedger::dim() const { return impl_->dim(); }
std::uint64_t LocalTimeLedger::steps() const { return impl_->steps(); }
std::uint64_t LocalTimeLedger::distinct_sites() const { return impl_->distinct_sites(); }
std::vector<std::int64_t> LocalTimeLedger::histogram() const { return impl_->histogram(); }
std::uint64_t LocalTimeLedger::local_time(const LatticePoint& x) const {
  return impl_->local_time(x);
}
std::uint32_t LocalTimeLedger::max_count() const { return impl_->max_count(); }
std::pair<std::uint64_t, LatticePoint> LocalTimeLedger::max_local_time() const {
  return impl_->max_local_time();
}

LocalTimeLedger simulate(const WalkConfig& cfg) {
  validate(cfg);
  return with_dim(cfg.d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    return wrap<D>(simulate_walk<D>(cfg.steps, cfg.seed, cfg.replica));
  });
}

LocalTimeLedger simulate_with_callback(const WalkConfig& cfg, const StepCallback& cb) {
  validate(cfg);
  return with_dim(cfg.d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    return wrap<D>(simulate_walk<D>(
        cfg.steps, cfg.seed, cfg.replica, [&](const StepEvent<D>& ev) {
          cb(ev.index, to_point<D>(ev.pos), ev.new_site, ev.count);
        }));
  });
}

void write_trajectory(const WalkConfig& cfg, std::ostream& os) {
  validate(cfg);
  with_dim(cfg.d, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    simulate_walk<D>(cfg.steps, cfg.seed, cfg.replica, [&](const StepEvent<D>& ev) {
      os << ev.index;
      for (int i = 0; i < D; ++i) os << ' ' << ev.pos[i];
      os << '\n';
    });
    return 0;
  });
}

}  // namespace walklab
