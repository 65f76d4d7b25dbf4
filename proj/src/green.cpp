#include "walklab/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace walklab {
namespace {

constexpr std::uint32_t kOutside = 0xFFFFFFFFu;

// Canonical wedge bookkeeping.  Sites are nondecreasing tuples
// 0 <= x_1 <= ... <= x_d <= R; with c_i = x_i + i - 1 strictly increasing the
// colex rank sum_i C(c_i, i) is a bijection onto [0, C(R+d, d)).
struct Wedge {
  int d, radius;
  std::vector<std::uint64_t> binom;  // C(m, i), m <= R+d, i <= d, row-major
  int bcols;

  Wedge(int d_, int radius_) : d(d_), radius(radius_) {
    const int rows = radius + d + 1;
    bcols = d + 1;
    binom.assign(static_cast<std::size_t>(rows) * bcols, 0);
    for (int m = 0; m < rows; ++m) {
      c(m, 0) = 1;
      for (int i = 1; i <= d && i <= m; ++i)
        c(m, i) = c(m - 1, i - 1) + (i <= m - 1 ? c(m - 1, i) : 0);
    }
  }
  std::uint64_t& c(int m, int i) { return binom[static_cast<std::size_t>(m) * bcols + i]; }
  std::uint64_t cv(int m, int i) const {
    return binom[static_cast<std::size_t>(m) * bcols + i];
  }

  std::size_t site_count() const { return cv(radius + d, d); }

  // x must be nondecreasing with 0 <= x_i <= radius
  std::size_t rank(const int* x) const {
    std::size_t r = 0;
    for (int i = 1; i <= d; ++i) r += cv(x[i - 1] + i - 1, i);
    return r;
  }
};

// |y| sorted ascending; returns max coordinate
int canonicalize(int* y, int d) {
  for (int i = 0; i < d; ++i) y[i] = y[i] < 0 ? -y[i] : y[i];
  std::sort(y, y + d);
  return y[d - 1];
}

double orbit_size(const int* x, int d) {
  int nonzero = 0;
  double perms = 1.0;  // d! / prod(mult!)
  for (int i = 1; i <= d; ++i) perms *= i;
  int run = 1;
  double runfact = 1.0;
  for (int i = 0; i < d; ++i) {
    if (x[i] != 0) ++nonzero;
    if (i > 0 && x[i] == x[i - 1]) {
      ++run;
      runfact *= run;
    } else {
      perms /= runfact;
      run = 1;
      runfact = 1.0;
    }
  }
  perms /= runfact;
  return std::ldexp(perms, nonzero);  // perms * 2^nonzero
}

struct ReducedSystem {
  Wedge wedge;
  std::size_t n;
  std::vector<double> orbit;
  std::vector<std::uint32_t> nbr;  // n x 2d, kOutside for killed moves

  ReducedSystem(int d, int radius) : wedge(d, radius), n(wedge.site_count()) {
    orbit.assign(n, 0.0);
    nbr.assign(n * 2 * d, kOutside);

    // odometer over nondecreasing tuples
    std::vector<int> x(d, 0);
    std::vector<int> y(d);
    while (true) {
      const std::size_t u = wedge.rank(x.data());
      orbit[u] = orbit_size(x.data(), d);
      for (int a = 0; a < d; ++a) {
        for (int sgn = 0; sgn < 2; ++sgn) {
          std::copy(x.begin(), x.end(), y.begin());
          y[a] += sgn == 0 ? 1 : -1;
          const int top = canonicalize(y.data(), d);
          nbr[u * 2 * d + 2 * a + sgn] =
              top > radius ? kOutside : static_cast<std::uint32_t>(wedge.rank(y.data()));
        }
      }
      // next nondecreasing tuple: bump the rightmost slot below the radius
      // and level the tail up to it
      int i = d - 1;
      while (i >= 0 && x[i] == radius) --i;
      if (i < 0) break;
      const int v = x[i] + 1;
      for (int j = i; j < d; ++j) x[j] = v;
    }
  }

  // y = D(I - P) x  with D = diag(orbit); symmetric positive definite
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const int deg = static_cast<int>(nbr.size() / n);
    const double inv = 1.0 / deg;
    for (std::size_t u = 0; u < n; ++u) {
      double acc = 0.0;
      const std::uint32_t* row = &nbr[u * deg];
      for (int k = 0; k < deg; ++k)
        if (row[k] != kOutside) acc += x[row[k]];
      y[u] = orbit[u] * (x[u] - inv * acc);
    }
  }
};

}  // namespace

double GreenTable::at(const LatticePoint& x) const {
  if (x.dim() != d) throw std::invalid_argument("dimension mismatch");
  std::vector<int> y(d);
  for (int i = 0; i < d; ++i) {
    if (std::llabs(x.coords[i]) > (1ll << 30)) return 0.0;
    y[i] = static_cast<int>(x.coords[i]);
  }
  if (canonicalize(y.data(), d) > radius) return 0.0;
  Wedge w(d, radius);
  return values[w.rank(y.data())];
}

GreenTable solve_green(int d, int radius, double tol, int max_iter) {
  check_dim(d, 3);
  if (radius < 8) throw std::invalid_argument("radius must be >= 8");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");

  ReducedSystem sys(d, radius);
  const std::size_t n = sys.n;

  std::vector<double> g(n, 0.0), r(n, 0.0), z(n), p(n), ap(n);
  r[0] = 1.0;  // unit source at the origin (orbit size 1, so D*e0 = e0)

  auto max_site_residual = [&]() {
    double worst = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      worst = std::max(worst, std::abs(r[u]) / sys.orbit[u]);
    return worst;
  };

  // PCG with Jacobi preconditioner diag(S) = orbit (no self-loops: parity)
  for (std::size_t u = 0; u < n; ++u) z[u] = r[u] / sys.orbit[u];
  p = z;
  double rz = 0.0;
  for (std::size_t u = 0; u < n; ++u) rz += r[u] * z[u];

  GreenTable out;
  out.d = d;
  out.radius = radius;
  out.tol = tol;

  int it = 0;
  double worst = max_site_residual();
  while (worst >= tol) {
    if (it++ >= max_iter)
      throw std::runtime_error("green solver did not converge at radius " +
                               std::to_string(radius));
    sys.apply(p, ap);
    double pap = 0.0;
    for (std::size_t u = 0; u < n; ++u) pap += p[u] * ap[u];
    const double alpha = rz / pap;
    for (std::size_t u = 0; u < n; ++u) g[u] += alpha * p[u];
    for (std::size_t u = 0; u < n; ++u) r[u] -= alpha * ap[u];
    double rz_next = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      z[u] = r[u] / sys.orbit[u];
      rz_next += r[u] * z[u];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t u = 0; u < n; ++u) p[u] = z[u] + beta * p[u];
    worst = max_site_residual();
  }

  out.iterations = it;
  out.max_residual = worst;
  out.values = std::move(g);
  return out;
}

double ExtrapolatedGreen::at(const LatticePoint& x) const {
  if (x.linf_norm() > trusted_radius)
    throw std::invalid_argument("point outside trusted radius " +
                                std::to_string(trusted_radius));
  const double f = std::ldexp(1.0, d - 2);  // 2^(d-2)
  return (f * fine.at(x) - coarse.at(x)) / (f - 1.0);
}

double ExtrapolatedGreen::error_at(const LatticePoint& x) const {
  if (x.linf_norm() > trusted_radius)
    throw std::invalid_argument("point outside trusted radius");
  const double f = std::ldexp(1.0, d - 2);
  return std::abs(fine.at(x) - coarse.at(x)) / (f - 1.0);
}

ExtrapolatedGreen extrapolated_green(int d, int r_coarse, double tol) {
  check_dim(d, 3);
  if (r_coarse == 0) r_coarse = d == 3 ? 32 : (d <= 6 ? 16 : 8);
  if (r_coarse < 8) throw std::invalid_argument("coarse radius must be >= 8");
  ExtrapolatedGreen g;
  g.d = d;
  g.coarse = solve_green(d, r_coarse, tol);
  g.fine = solve_green(d, 2 * r_coarse, tol);
  g.trusted_radius = r_coarse / 2;
  return g;
}

ValueWithError escape_probability(const ExtrapolatedGreen& g) {
  const double g0 = g.at(LatticePoint::origin(g.d));
  const double e0 = g.error_at(LatticePoint::origin(g.d));
  if (!(g0 > 1.0)) throw std::runtime_error("implausible Green value at origin");
  return {1.0 / g0, e0 / (g0 * g0)};
}

ValueWithError two_point_escape(const ExtrapolatedGreen& g, const LatticePoint& x) {
  if (x.dim() != g.d) throw std::invalid_argument("dimension mismatch");
  if (x.is_origin()) throw std::invalid_argument("target must differ from the origin");
  const double g0 = g.at(LatticePoint::origin(g.d));
  const double gx = g.at(x);
  const double e0 = g.error_at(LatticePoint::origin(g.d));
  const double ex = g.error_at(x);
  if (!(g0 > 1.0) || !(gx > 0.0) || !(gx < g0))
    throw std::runtime_error("implausible Green values for two-point constants");
  return {1.0 - gx / g0, ex / g0 + gx * e0 / (g0 * g0)};
}

RaceProbabilities race_probabilities_exact(double gamma, double gamma_x) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("escape probability must be in (0,1)");
  if (!(gamma_x < 1.0)) throw std::invalid_argument("two-point escape must be < 1");
  // a nearest-neighbour target gives gamma_x == gamma exactly; independent
  // extrapolations can land a rounding hair below, which we treat as equality
  if (gamma_x < gamma) {
    if (gamma - gamma_x > 1e-6)
      throw std::invalid_argument("two-point escape below one-point escape");
    gamma_x = gamma;
  }
  const double q = 1.0 - gamma / (gamma_x * (2.0 - gamma_x));
  const double s = (1.0 - gamma_x) * (1.0 - q);
  if (!(q > 0.0 && q < 1.0 && s > 0.0 && s < 1.0 && q + s < 1.0))
    throw std::runtime_error("race probabilities out of range");
  return {q, s};
}

}  // namespace walklab
