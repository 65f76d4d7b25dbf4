#pragma once
// Lattice geometry shared by every module: points, the nearest-neighbour step
// law, and the dispatch that turns a runtime dimension into a compile-time one.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace walklab {

inline constexpr int kMinDim = 1;
inline constexpr int kMaxDim = 8;

// Simulation kernels index sites with int32 coordinates: every reachable
// coordinate is bounded by the step count, and step counts are validated to
// stay below 2^31.  The public point type is wider.
template <int D>
using Site = std::array<std::int32_t, D>;

struct LatticePoint {
  std::vector<std::int64_t> coords;

  LatticePoint() = default;
  explicit LatticePoint(std::vector<std::int64_t> c) : coords(std::move(c)) {}
  static LatticePoint origin(int d) { return LatticePoint(std::vector<std::int64_t>(d, 0)); }

  int dim() const { return static_cast<int>(coords.size()); }
  bool is_origin() const {
    for (auto c : coords)
      if (c != 0) return false;
    return true;
  }
  std::int64_t l1_norm() const {
    std::int64_t s = 0;
    for (auto c : coords) s += std::abs(c);
    return s;
  }
  std::int64_t linf_norm() const {
    std::int64_t m = 0;
    for (auto c : coords) m = std::max(m, std::abs(c));
    return m;
  }
  // parity of the step index at which this site can be occupied
  int parity() const {
    std::int64_t s = 0;
    for (auto c : coords) s += c;
    return static_cast<int>(((s % 2) + 2) % 2);
  }
  bool operator==(const LatticePoint& o) const { return coords == o.coords; }
  bool operator!=(const LatticePoint& o) const { return coords != o.coords; }
};

inline std::string format_point(const LatticePoint& p) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < p.dim(); ++i) {
    if (i) os << ',';
    os << p.coords[i];
  }
  os << ')';
  return os.str();
}

// "a,b,c" -> point; throws on malformed input
inline LatticePoint parse_point(const std::string& text) {
  std::vector<std::int64_t> coords;
  std::string tok;
  std::istringstream is(text);
  while (std::getline(is, tok, ',')) {
    std::size_t used = 0;
    long long v = std::stoll(tok, &used);
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) throw std::invalid_argument("bad coordinate: " + tok);
    coords.push_back(v);
  }
  if (coords.empty()) throw std::invalid_argument("empty point");
  return LatticePoint(std::move(coords));
}

template <int D>
Site<D> to_site(const LatticePoint& p) {
  if (p.dim() != D) throw std::invalid_argument("point dimension mismatch");
  Site<D> s{};
  for (int i = 0; i < D; ++i) {
    if (p.coords[i] < INT32_MIN || p.coords[i] > INT32_MAX)
      throw std::invalid_argument("coordinate out of kernel range");
    s[i] = static_cast<std::int32_t>(p.coords[i]);
  }
  return s;
}

template <int D>
LatticePoint to_point(const Site<D>& s) {
  std::vector<std::int64_t> c(D);
  for (int i = 0; i < D; ++i) c[i] = s[i];
  return LatticePoint(std::move(c));
}

// Direction encoding used everywhere: r in [0, 2d), axis r>>1, displacement
// +1 for even r.  So r = 0,1,2,3,... means +e1, -e1, +e2, -e2, ...
template <int D>
inline void apply_step(Site<D>& p, unsigned r) {
  p[r >> 1] += 1 - 2 * static_cast<std::int32_t>(r & 1u);
}

inline void check_dim(int d, int lo = kMinDim) {
  if (d < lo || d > kMaxDim)
    throw std::invalid_argument("dimension out of range [" + std::to_string(lo) + "," +
                                std::to_string(kMaxDim) + "]: " + std::to_string(d));
}

// Uniform nearest-neighbour step distribution; masses sum to one exactly in
// the sense that they are all the same double 1/(2d).
inline std::vector<std::pair<LatticePoint, double>> step_law(int d) {
  check_dim(d);
  std::vector<std::pair<LatticePoint, double>> law;
  law.reserve(2 * d);
  const double mass = 1.0 / (2.0 * d);
  for (int r = 0; r < 2 * d; ++r) {
    LatticePoint p = LatticePoint::origin(d);
    p.coords[r >> 1] = 1 - 2 * (r & 1);
    law.emplace_back(std::move(p), mass);
  }
  return law;
}

// Runs f with the dimension as an integral_constant; all branches must yield
// the same result type.
template <class F>
decltype(auto) with_dim(int d, F&& f) {
  switch (d) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    case 4: return f(std::integral_constant<int, 4>{});
    case 5: return f(std::integral_constant<int, 5>{});
    case 6: return f(std::integral_constant<int, 6>{});
    case 7: return f(std::integral_constant<int, 7>{});
    case 8: return f(std::integral_constant<int, 8>{});
    default:
      throw std::invalid_argument("dimension out of range [1,8]: " + std::to_string(d));
  }
}

}  // namespace walklab
