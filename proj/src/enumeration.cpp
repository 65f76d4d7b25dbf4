#include "walklab/enumeration.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

#include "walklab/lattice.hpp"

namespace walklab {
namespace {

// Occupancy store for the current DFS prefix.  A flat array over the reachable
// box when it fits, otherwise a hash map (high dimensions).  Counts are only
// ever adjusted by +-1 at the walker's position.
struct FlatOcc {
  int side;
  std::vector<std::uint16_t> cells;
  std::vector<std::int64_t> stride;

  FlatOcc(int d, int n) : side(2 * n + 1), cells(), stride(d) {
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) {
      stride[i] = total;
      total *= side;
    }
    cells.assign(static_cast<std::size_t>(total), 0);
  }
  static bool fits(int d, int n) {
    const double cellcount = std::pow(2.0 * n + 1, d);
    return cellcount <= 64e6;
  }
};

struct HashOcc {
  std::unordered_map<std::uint64_t, std::uint16_t> cells;
};

template <int D, class Occ>
struct Dfs;

template <int D>
struct Counters {
  int n_max;
  std::vector<std::int64_t> noret;                 // [m], m = 0..n_max
  std::vector<std::vector<std::int64_t>> dq;       // [m][k]
  std::vector<std::vector<std::int64_t>> dorigin;  // [m][j]

  explicit Counters(int n) : n_max(n) {
    noret.assign(n + 1, 0);
    noret[0] = 1;
    dq.assign(n + 1, {});
    dorigin.assign(n + 1, {});
    for (int m = 0; m <= n; ++m) {
      dq[m].assign(m + 1, 0);
      dorigin[m].assign(m + 1, 0);
    }
  }
};

template <int D>
struct DfsState {
  Site<D> pos{};
  Counters<D>* ctr;
  int n_max;
};

template <int D>
inline bool at_origin(const Site<D>& p) {
  std::int32_t acc = 0;
  for (int i = 0; i < D; ++i) acc |= p[i];
  return acc == 0;
}

// occupancy accessors
template <int D>
inline std::size_t flat_index(const FlatOcc& occ, const Site<D>& p, int n) {
  std::size_t idx = 0;
  for (int i = 0; i < D; ++i)
    idx += static_cast<std::size_t>(p[i] + n) * static_cast<std::size_t>(occ.stride[i]);
  return idx;
}
template <int D>
inline std::uint16_t bump(FlatOcc& occ, const Site<D>& p, int n, int delta) {
  auto& c = occ.cells[flat_index<D>(occ, p, n)];
  c = static_cast<std::uint16_t>(c + delta);
  return c;
}
template <int D>
inline std::uint64_t pack(const Site<D>& p, int n) {
  // shifted coordinates fit in 7 bits for every feasible budget (2n <= 52)
  std::uint64_t key = 0;
  for (int i = 0; i < D; ++i)
    key = (key << 7) | static_cast<std::uint64_t>(p[i] + n);
  return key;
}
template <int D>
inline std::uint16_t bump(HashOcc& occ, const Site<D>& p, int n, int delta) {
  auto& c = occ.cells[pack<D>(p, n)];
  c = static_cast<std::uint16_t>(c + delta);
  return c;
}

template <int D, class Occ>
void dfs(DfsState<D>& st, Occ& occ, int depth, bool alive, std::uint16_t origin_count) {
  Counters<D>& ctr = *st.ctr;
  const int m = depth + 1;
  for (unsigned r = 0; r < 2 * D; ++r) {
    apply_step<D>(st.pos, r);
    const std::uint16_t c = bump<D>(occ, st.pos, st.n_max, +1);

    ctr.dq[m][c] += 1;
    if (c > 1) ctr.dq[m][c - 1] -= 1;

    const bool on_origin = at_origin<D>(st.pos);
    std::uint16_t oc = origin_count;
    if (on_origin) {
      oc = c;
      ctr.dorigin[m][oc] += 1;
      ctr.dorigin[m][oc - 1] -= 1;
    }
    const bool child_alive = alive && !on_origin;
    if (child_alive) ctr.noret[m] += 1;

    if (m < st.n_max) dfs<D, Occ>(st, occ, m, child_alive, oc);

    bump<D>(occ, st.pos, st.n_max, -1);
    apply_step<D>(st.pos, r ^ 1u);  // opposite direction undoes the move
  }
}

template <int D>
EnumerationResult run(int n_max) {
  Counters<D> ctr(n_max);
  DfsState<D> st{{}, &ctr, n_max};
  if (FlatOcc::fits(D, n_max)) {
    FlatOcc occ(D, n_max);
    dfs<D, FlatOcc>(st, occ, 0, true, 0);
  } else {
    HashOcc occ;
    dfs<D, HashOcc>(st, occ, 0, true, 0);
  }

  EnumerationResult res;
  res.d = D;
  res.n_max = n_max;
  const std::int64_t base = 2 * D;

  // paths[m] = (2d)^m
  std::vector<std::int64_t> paths(n_max + 1, 1);
  for (int m = 1; m <= n_max; ++m) paths[m] = paths[m - 1] * base;

  res.exact_count.assign(n_max + 1, {});
  res.origin_law.assign(n_max + 1, {});
  std::vector<std::vector<std::int64_t>> tq(n_max + 1), torig(n_max + 1);
  for (int m = 0; m <= n_max; ++m) {
    tq[m].assign(m + 1, 0);
    torig[m].assign(m + 1, 0);
  }
  torig[0][0] = 1;
  for (int m = 1; m <= n_max; ++m) {
    for (int k = 1; k <= m; ++k) {
      const std::int64_t prev = k <= m - 1 ? tq[m - 1][k] : 0;
      tq[m][k] = base * prev + ctr.dq[m][k];
    }
    for (int j = 0; j <= m; ++j) {
      const std::int64_t prev = j <= m - 1 ? torig[m - 1][j] : 0;
      torig[m][j] = base * prev + ctr.dorigin[m][j];
    }
    res.exact_count[m].assign(m + 1, Fraction{0, 1});
    res.origin_law[m].assign(m + 1, Fraction{0, 1});
    for (int k = 1; k <= m; ++k)
      res.exact_count[m][k] = Fraction::make(tq[m][k], paths[m]);
    for (int j = 0; j <= m; ++j)
      res.origin_law[m][j] = Fraction::make(torig[m][j], paths[m]);
  }
  res.no_return.assign(n_max + 2, Fraction{1, 1});
  for (int m = 1; m <= n_max + 1; ++m)
    res.no_return[m] = Fraction::make(ctr.noret[m - 1], paths[m - 1]);
  return res;
}

}  // namespace

EnumerationResult enumerate_paths(int d, int n_max, std::uint64_t budget) {
  check_dim(d);
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  long double nodes = 1;
  for (int m = 0; m < n_max; ++m) nodes *= 2.0L * d;
  if (nodes > static_cast<long double>(budget))
    throw std::invalid_argument("enumeration budget exceeded: (2d)^n_max > budget");
  return with_dim(d, [&](auto dc) { return run<decltype(dc)::value>(n_max); });
}

}  // namespace walklab
