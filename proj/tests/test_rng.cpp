#include <doctest.h>

#include <cstdint>

#include "walklab/rng.hpp"

using namespace walklab;

// The stream contract is frozen: these values were produced by an independent
// reimplementation of the derivation and generator.  Any change here breaks
// reproducibility of archived runs.
TEST_CASE("stream derivation and first outputs are pinned") {
  CHECK(derive_stream_seed(42, 0, 1) == 4467162330169855482ull);

  auto g = make_stream(42, 0, purpose::kWalk);
  CHECK(g.next() == 14915802299433122334ull);
  CHECK(g.next() == 5105945937864304561ull);
  CHECK(g.next() == 16624816713800686548ull);
  CHECK(g.next() == 18357289120385198421ull);

  auto g_rep = make_stream(42, 1, purpose::kWalk);
  CHECK(g_rep.next() == 14467408076171978327ull);
  auto g_pur = make_stream(42, 0, purpose::kReturnTime);
  CHECK(g_pur.next() == 7478633488867508735ull);
}

TEST_CASE("bounded draws are pinned and in range") {
  auto g = make_stream(1, 0, purpose::kWalk);
  const std::uint64_t expected[12] = {2, 1, 0, 4, 1, 0, 5, 3, 0, 3, 0, 0};
  for (auto e : expected) {
    const auto v = uniform_below(g, 6);
    CHECK(v == e);
    CHECK(v < 6);
  }
}

TEST_CASE("streams are reproducible and sensitive to every key part") {
  auto a1 = make_stream(7, 3, purpose::kHeavy);
  auto a2 = make_stream(7, 3, purpose::kHeavy);
  for (int i = 0; i < 100; ++i) CHECK(a1.next() == a2.next());

  auto b = make_stream(7, 4, purpose::kHeavy);
  auto c = make_stream(8, 3, purpose::kHeavy);
  auto d = make_stream(7, 3, purpose::kLimits);
  auto base = make_stream(7, 3, purpose::kHeavy);
  const auto first = base.next();
  CHECK(b.next() != first);
  CHECK(c.next() != first);
  CHECK(d.next() != first);
}

TEST_CASE("unit doubles sit in [0,1) and are not constant") {
  auto g = make_stream(3, 0, purpose::kWalk);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = g.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = u < lo ? u : lo;
    hi = u > hi ? u : hi;
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("bounded draws cover the range uniformly enough") {
  auto g = make_stream(11, 0, purpose::kWalk);
  const std::uint64_t bound = 6;
  std::uint64_t counts[6] = {};
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++counts[uniform_below(g, bound)];
  for (auto c : counts) {
    // ~N(10000, sqrt(10000*5/6) ~ 91); 6 sigma band
    CHECK(c > 9400);
    CHECK(c < 10600);
  }
}
