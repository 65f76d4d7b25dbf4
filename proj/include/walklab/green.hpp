#pragma once
// Lattice potential oracle.  Solves the killed-walk Green's function on a box
// exactly (up to iteration tolerance), removes the leading finite-box error by
// Richardson extrapolation in the box radius, and derives the escape
// probabilities and two-point first-passage constants from it.

#include <cstdint>
#include <vector>

#include "walklab/lattice.hpp"

namespace walklab {

// Expected visits to x before the walk first leaves |y|_inf <= radius,
// starting at the origin.  Stored on the canonical wedge
// 0 <= x_1 <= ... <= x_d <= radius; lookups canonicalize first.
struct GreenTable {
  int d = 0;
  int radius = 0;
  double tol = 0.0;
  int iterations = 0;       // PCG iterations used
  double max_residual = 0;  // max per-site equation residual at exit
  std::vector<double> values;  // by canonical rank

  // 0 outside the box
  double at(const LatticePoint& x) const;
  std::size_t site_count() const { return values.size(); }
};

// d >= 3, radius >= 8
GreenTable solve_green(int d, int radius, double tol = 1e-10, int max_iter = 20000);

// Pair of solves at radius and 2*radius combined by Richardson extrapolation;
// the boundary deficit decays like radius^-(d-2), so the combination
// (2^(d-2) G_fine - G_coarse) / (2^(d-2) - 1) removes the leading term.
struct ExtrapolatedGreen {
  int d = 0;
  GreenTable coarse, fine;
  int trusted_radius = 0;  // lookups outside this radius are refused

  double at(const LatticePoint& x) const;
  double error_at(const LatticePoint& x) const;  // leading-term magnitude
};

// radii 0 = per-dimension defaults: (32,64) for d=3, (16,32) for d=4..6,
// (8,16) for d=7..8
ExtrapolatedGreen extrapolated_green(int d, int r_coarse = 0, double tol = 1e-10);

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

// escape probability = 1 / G(0)
ValueWithError escape_probability(const ExtrapolatedGreen& g);
// escape-before-target complement: 1 - G(x)/G(0), x != 0
ValueWithError two_point_escape(const ExtrapolatedGreen& g, const LatticePoint& x);

struct RaceProbabilities {
  double q = 0.0;  // origin revisited before the target is hit
  double s = 0.0;  // target hit before the origin is revisited
};
// Exact first-passage split for the pair {origin, x} from the two escape
// probabilities; rejects gamma_x < gamma.
RaceProbabilities race_probabilities_exact(double gamma, double gamma_x);

}  // namespace walklab
