#include <doctest.h>

#include <sstream>

#include "walklab/walk.hpp"

using namespace walklab;

TEST_CASE("config validation rejects out-of-contract runs") {
  CHECK_NOTHROW(validate(WalkConfig{3, 10, 1, 0, {}}));
  CHECK_THROWS_AS(validate(WalkConfig{2, 10, 1, 0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(WalkConfig{3, 0, 1, 0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(WalkConfig{3, 1ull << 31, 1, 0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(WalkConfig{3, 10, 1, 0, 5}), std::invalid_argument);
  CHECK_NOTHROW(validate(WalkConfig{3, 10, 1, 0, 40}));
}

TEST_CASE("every step moves to a neighbour and respects parity") {
  Site<4> prev{};
  std::uint64_t expected_index = 1;
  const auto led = simulate_walk<4>(3000, 5, 2, [&](const StepEvent<4>& ev) {
    CHECK(ev.index == expected_index++);
    std::int64_t dist = 0, parity = 0;
    for (int i = 0; i < 4; ++i) {
      dist += std::abs(ev.pos[i] - prev[i]);
      parity += ev.pos[i];
    }
    CHECK(dist == 1);
    CHECK(((parity % 2 + 2) % 2) == static_cast<std::int64_t>(ev.index % 2));
    prev = ev.pos;
  });
  CHECK(led.steps() == 3000);
  CHECK(led.consistent());
}

TEST_CASE("the visitor count mirrors the ledger") {
  simulate_walk<3>(500, 11, 0, [&](const StepEvent<3>& ev) {
    CHECK((ev.count == 1) == ev.new_site);
    CHECK(ev.count >= 1);
  });
}

TEST_CASE("identical configs give identical walks") {
  const auto a = simulate_walk<3>(2000, 21, 9);
  const auto b = simulate_walk<3>(2000, 21, 9);
  CHECK(a.distinct_sites() == b.distinct_sites());
  CHECK(a.histogram().bins() == b.histogram().bins());
  const auto c = simulate_walk<3>(2000, 21, 10);
  CHECK(a.histogram().bins() != c.histogram().bins());
}

TEST_CASE("runtime facade matches the templated ledger") {
  const WalkConfig cfg{3, 1000, 13, 4, {}};
  const auto led = simulate(cfg);
  const auto raw = simulate_walk<3>(1000, 13, 4);
  CHECK(led.dim() == 3);
  CHECK(led.steps() == 1000);
  CHECK(led.distinct_sites() == raw.distinct_sites());
  CHECK(led.max_count() == raw.histogram().max_count());

  std::int64_t sites = 0, mass = 0;
  const auto hist = led.histogram();
  CHECK(hist[0] == 0);
  for (std::size_t k = 1; k < hist.size(); ++k) {
    sites += hist[k];
    mass += static_cast<std::int64_t>(k) * hist[k];
  }
  CHECK(sites == static_cast<std::int64_t>(led.distinct_sites()));
  CHECK(mass == 1000);

  const auto [mx, witness] = led.max_local_time();
  CHECK(mx == led.max_count());
  CHECK(led.local_time(witness) == mx);
}

TEST_CASE("step callback sees the same path as the ledger") {
  const WalkConfig cfg{3, 300, 17, 0, {}};
  std::uint64_t calls = 0;
  LatticePoint last;
  const auto led = simulate_with_callback(cfg, [&](std::uint64_t index,
                                                   const LatticePoint& pos, bool fresh,
                                                   std::uint64_t count) {
    ++calls;
    CHECK(index == calls);
    CHECK(pos.dim() == 3);
    CHECK((count == 1) == fresh);
    last = pos;
  });
  CHECK(calls == 300);
  CHECK(led.local_time(last) >= 1);
}

TEST_CASE("trajectory dump format is one indexed line per step") {
  const WalkConfig cfg{3, 5, 23, 0, {}};
  std::ostringstream os;
  write_trajectory(cfg, os);
  std::istringstream is(os.str());
  std::string line;
  std::uint64_t lines = 0;
  LatticePoint prev = LatticePoint::origin(3);
  while (std::getline(is, line)) {
    ++lines;
    std::istringstream ls(line);
    std::uint64_t idx;
    std::int64_t x, y, z;
    REQUIRE((ls >> idx >> x >> y >> z));
    CHECK(idx == lines);
    const LatticePoint p({x, y, z});
    std::int64_t dist = 0;
    for (int i = 0; i < 3; ++i) dist += std::abs(p.coords[i] - prev.coords[i]);
    CHECK(dist == 1);
    prev = p;
  }
  CHECK(lines == 5);
}

TEST_CASE("step source emits directions in range") {
  StepSource src(5, 3, 0);
  CHECK(src.directions() == 10);
  for (int i = 0; i < 1000; ++i) CHECK(src.next() < 10);
  CHECK_THROWS_AS(StepSource(9, 1, 0), std::invalid_argument);
}
