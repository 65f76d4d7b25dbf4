// Python bindings: thin wrappers over the library entry points.  Points cross
// the boundary as plain integer sequences, tables as lists of dicts, so the
// module has no custom container types to learn.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "walklab/enumeration.hpp"
#include "walklab/green.hpp"
#include "walklab/harness.hpp"
#include "walklab/heavy.hpp"
#include "walklab/hitting.hpp"
#include "walklab/stats.hpp"
#include "walklab/version.hpp"
#include "walklab/walk.hpp"

namespace py = pybind11;
using namespace walklab;

namespace {

LatticePoint as_point(const std::vector<std::int64_t>& coords) {
  return LatticePoint(coords);
}

std::vector<LatticePoint> as_points(const std::vector<std::vector<std::int64_t>>& pts) {
  std::vector<LatticePoint> out;
  out.reserve(pts.size());
  for (const auto& c : pts) out.emplace_back(c);
  return out;
}

py::dict gof_dict(const std::optional<GofResult>& g) {
  if (!g) return py::dict();
  py::dict d;
  d["statistic"] = g->statistic;
  d["df"] = g->df;
  d["p_value"] = g->p_value;
  d["bins_used"] = g->bins_used;
  return d;
}

py::dict law_dict(const OccupationLawReport& rep) {
  py::dict d;
  d["d"] = rep.hist.d;
  d["horizon"] = rep.hist.horizon;
  d["replicas"] = rep.hist.replicas;
  d["censored"] = rep.hist.censored;
  d["counts"] = rep.hist.counts;
  d["geom_ratio"] = rep.geom_ratio;
  d["gof"] = gof_dict(rep.gof);
  return d;
}

py::dict escape_dict(const EscapeEstimate& e) {
  py::dict d;
  d["d"] = e.d;
  d["horizon"] = e.horizon;
  d["replicas"] = e.replicas;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["bias_exponent"] = e.bias_exponent;
  return d;
}

py::list fraction_rows(const EnumerationResult& res) {
  py::list rows;
  for (int m = 1; m <= res.n_max; ++m)
    for (int k = 1; k <= m; ++k) {
      py::dict r;
      r["m"] = m;
      r["k"] = k;
      r["fraction"] = res.exact_count[m][k].str();
      r["value"] = res.exact_count[m][k].value();
      rows.append(r);
    }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "occupation statistics of the simple random walk on Z^d";
  m.attr("__version__") = kVersion;

  m.def(
      "step_law",
      [](int d) {
        py::list out;
        for (const auto& [p, mass] : step_law(d)) out.append(py::make_tuple(p.coords, mass));
        return out;
      },
      py::arg("d"), "uniform nearest-neighbour step distribution");

  py::class_<LocalTimeLedger>(m, "WalkLedger",
                              "site occupation record of one simulated walk")
      .def_property_readonly("d", &LocalTimeLedger::dim)
      .def_property_readonly("steps", &LocalTimeLedger::steps)
      .def_property_readonly("distinct_sites", &LocalTimeLedger::distinct_sites)
      .def("histogram", &LocalTimeLedger::histogram,
           "histogram[k] = sites visited exactly k times; histogram[0] == 0")
      .def(
          "local_time",
          [](const LocalTimeLedger& led, const std::vector<std::int64_t>& x) {
            return led.local_time(as_point(x));
          },
          py::arg("x"))
      .def_property_readonly("max_count", &LocalTimeLedger::max_count)
      .def(
          "max_local_time",
          [](const LocalTimeLedger& led) {
            const auto [count, witness] = led.max_local_time();
            return py::make_tuple(count, witness.coords);
          },
          "largest local time and its lexicographically smallest witness");

  m.def(
      "simulate",
      [](int d, std::uint64_t steps, std::uint64_t seed, std::uint64_t replica) {
        WalkConfig cfg;
        cfg.d = d;
        cfg.steps = steps;
        cfg.seed = seed;
        cfg.replica = replica;
        return simulate(cfg);
      },
      py::arg("d"), py::arg("steps"), py::arg("seed") = 1, py::arg("replica") = 0,
      py::call_guard<py::gil_scoped_release>(), "run one walk and return its ledger");

  // first-passage estimators; the GIL is dropped for the simulation part only,
  // python objects are built with it held
  m.def(
      "escape_by",
      [](int d, std::uint64_t n, std::uint64_t replicas, std::uint64_t seed) {
        EscapeEstimate e;
        {
          py::gil_scoped_release release;
          e = escape_by(d, n, replicas, seed);
        }
        return escape_dict(e);
      },
      py::arg("d"), py::arg("n"), py::arg("replicas"), py::arg("seed") = 1,
      "P(no return to the origin during steps 1..n-1)");
  m.def(
      "escape_estimate",
      [](int d, std::uint64_t horizon, std::uint64_t replicas, std::uint64_t seed) {
        EscapeEstimate e;
        {
          py::gil_scoped_release release;
          e = escape_estimate(d, horizon, replicas, seed);
        }
        return escape_dict(e);
      },
      py::arg("d"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 1);
  m.def(
      "target_avoidance",
      [](int d, const std::vector<std::int64_t>& x, std::uint64_t horizon,
         std::uint64_t replicas, std::uint64_t seed) {
        EscapeEstimate e;
        {
          py::gil_scoped_release release;
          e = target_avoidance(d, as_point(x), horizon, replicas, seed);
        }
        return escape_dict(e);
      },
      py::arg("d"), py::arg("x"), py::arg("horizon"), py::arg("replicas"),
      py::arg("seed") = 1);
  m.def(
      "race",
      [](int d, const std::vector<std::int64_t>& x, std::uint64_t horizon,
         std::uint64_t replicas, std::uint64_t seed) {
        RaceEstimate r;
        {
          py::gil_scoped_release release;
          r = race_estimate(d, as_point(x), horizon, replicas, seed);
        }
        py::dict out;
        out["d"] = r.d;
        out["target"] = r.target.coords;
        out["horizon"] = r.horizon;
        out["replicas"] = r.replicas;
        out["return_first"] = r.return_first;
        out["target_first"] = r.target_first;
        out["censored"] = r.censored;
        out["q"] = r.q;
        out["s"] = r.s;
        out["q_se"] = r.q_se;
        out["s_se"] = r.s_se;
        return out;
      },
      py::arg("d"), py::arg("x"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 1,
      "first return to the origin raced against the first visit to x");

  m.def(
      "origin_occupation_law",
      [](int d, std::uint64_t horizon, std::uint64_t replicas, std::uint64_t seed,
         std::optional<double> expected_ratio) {
        OccupationLawReport rep;
        {
          py::gil_scoped_release release;
          rep = origin_occupation_law(d, horizon, replicas, seed, expected_ratio);
        }
        return law_dict(rep);
      },
      py::arg("d"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 1,
      py::arg("expected_ratio") = std::nullopt);
  m.def(
      "pair_occupation_law",
      [](int d, const std::vector<std::int64_t>& x, std::uint64_t horizon,
         std::uint64_t replicas, std::uint64_t seed, std::optional<double> expected_ratio) {
        OccupationLawReport rep;
        {
          py::gil_scoped_release release;
          rep = pair_occupation_law(d, as_point(x), horizon, replicas, seed, expected_ratio);
        }
        return law_dict(rep);
      },
      py::arg("d"), py::arg("x"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 1,
      py::arg("expected_ratio") = std::nullopt);
  m.def(
      "visits_before_return_law",
      [](int d, const std::vector<std::int64_t>& x, std::uint64_t horizon,
         std::uint64_t replicas, std::uint64_t seed) {
        OccupationLawReport rep;
        {
          py::gil_scoped_release release;
          rep = visits_before_return_law(d, as_point(x), horizon, replicas, seed);
        }
        return law_dict(rep);
      },
      py::arg("d"), py::arg("x"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 1);

  m.def(
      "coupled_estimates",
      [](int d, const std::vector<std::vector<std::int64_t>>& targets, std::uint64_t horizon,
         std::uint64_t replicas, std::uint64_t seed) {
        std::vector<CoupledPairEstimates> result;
        {
          py::gil_scoped_release release;
          result = coupled_hitting_estimates(d, as_points(targets), horizon, replicas, seed);
        }
        py::list out;
        for (const auto& c : result) {
          py::dict e;
          e["d"] = c.d;
          e["target"] = c.target.coords;
          e["horizon"] = c.horizon;
          e["replicas"] = c.replicas;
          e["gamma"] = c.gamma;
          e["gamma_x"] = c.gamma_x;
          e["q"] = c.q;
          e["s"] = c.s;
          e["race_censored_fraction"] = c.race_censored_fraction;
          py::list residuals;
          for (const auto& r : identity_residuals(HittingRates::from_coupled(c))) {
            py::dict rd;
            rd["name"] = r.name;
            rd["residual"] = r.residual;
            rd["se"] = r.se;
            rd["z"] = r.z;
            residuals.append(rd);
          }
          e["identity_residuals"] = residuals;
          out.append(e);
        }
        return out;
      },
      py::arg("d"), py::arg("targets"), py::arg("horizon"), py::arg("replicas"),
      py::arg("seed") = 1,
      "coupled escape/avoidance/race estimates with identity residual checks");

  m.def(
      "identity_residuals",
      [](double gamma, double gamma_x, double q, double s) {
        HittingRates hr;
        hr.gamma = gamma;
        hr.gamma_x = gamma_x;
        hr.q = q;
        hr.s = s;
        py::list out;
        for (const auto& r : identity_residuals(hr)) {
          py::dict rd;
          rd["name"] = r.name;
          rd["residual"] = r.residual;
          out.append(rd);
        }
        return out;
      },
      py::arg("gamma"), py::arg("gamma_x"), py::arg("q"), py::arg("s"),
      "first-passage identity residuals for exact inputs");

  // heavy-site statistics
  m.def(
      "heavy_counts",
      [](int d, std::uint64_t n, std::uint64_t horizon, std::uint64_t seed,
         std::uint64_t replica) {
        HeavyCounts hc;
        {
          py::gil_scoped_release release;
          hc = heavy_counts(d, n, horizon, seed, replica);
        }
        py::dict out;
        out["d"] = hc.d;
        out["n"] = hc.n;
        out["horizon"] = hc.horizon;
        out["distinct_by_n"] = hc.distinct_by_n;
        py::list rows;
        for (int t = 1; t <= hc.max_level(); ++t) {
          const auto& row = hc.level(t);
          py::dict r;
          r["t"] = row.t;
          r["exact_n"] = row.exact_n;
          r["lifetime_exact"] = row.lifetime_exact;
          r["at_least_n"] = row.at_least_n;
          r["lifetime_at_least"] = row.lifetime_at_least;
          r["deficit"] = row.deficit;
          rows.append(r);
        }
        out["levels"] = rows;
        return out;
      },
      py::arg("d"), py::arg("n"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("replica") = 0,
      "per-level occupation counts at n with lifetime proxies at the horizon");

  m.def(
      "path_max",
      [](int d, std::uint64_t n, std::uint64_t horizon, std::uint64_t seed,
         std::uint64_t replica) {
        PathMaxStats ps;
        {
          py::gil_scoped_release release;
          ps = path_max_stats(d, n, horizon, seed, replica);
        }
        py::dict out;
        out["d"] = ps.d;
        out["n"] = ps.n;
        out["horizon"] = ps.horizon;
        out["max_by_n"] = ps.max_by_n;
        out["max_lifetime"] = ps.max_lifetime;
        return out;
      },
      py::arg("d"), py::arg("n"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("replica") = 0);

  m.def(
      "waiting_time",
      [](int d, std::uint64_t i, int t, std::uint64_t horizon, std::uint64_t seed,
         std::uint64_t replica) {
        const auto wt = waiting_time_to_level(d, i, t, horizon, seed, replica);
        py::dict out;
        out["step"] = wt.step;
        out["level"] = wt.level;
        out["fresh_site"] = wt.fresh_site;
        out["censored"] = wt.censored;
        out["wait"] = wt.wait;
        return out;
      },
      py::arg("d"), py::arg("i"), py::arg("t"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("replica") = 0,
      "waiting time for the site occupied at step i to reach t visits");

  m.def("mu_of", &mu_of, py::arg("gamma"), py::arg("t"),
        "per-step density gamma*(1-gamma)^(t-1) of sites reaching level t");
  m.def("lambda_of", &lambda_of, py::arg("gamma"), "growth constant -1/log(1-gamma)");
  m.def(
      "threshold_level",
      [](double gamma, double b, std::uint64_t n) {
        return threshold_level(ThresholdParams{gamma, b}, n);
      },
      py::arg("gamma"), py::arg("b"), py::arg("n"),
      "critical occupation level floor(lambda log n - lambda b log log n), at least 1");
  m.def(
      "threshold_psi",
      [](double gamma, double b, std::uint64_t n) {
        return threshold_psi(ThresholdParams{gamma, b}, n);
      },
      py::arg("gamma"), py::arg("b"), py::arg("n"));

  // potential-theoretic oracle
  m.def(
      "escape_constants",
      [](int d, int radius) {
        const auto green = extrapolated_green(d, radius);
        const auto gamma = escape_probability(green);
        py::dict out;
        out["d"] = d;
        out["gamma"] = gamma.value;
        out["gamma_error"] = gamma.error;
        out["lambda"] = lambda_of(gamma.value);
        out["trusted_radius"] = green.trusted_radius;
        return out;
      },
      py::arg("d"), py::arg("radius") = 0,
      "escape probability and growth constant from the lattice Green function");
  m.def(
      "green_at",
      [](int d, const std::vector<std::int64_t>& x, int radius) {
        const auto green = extrapolated_green(d, radius);
        const auto p = as_point(x);
        return py::make_tuple(green.at(p), green.error_at(p));
      },
      py::arg("d"), py::arg("x"), py::arg("radius") = 0,
      "Green function value and extrapolation error estimate at x");
  m.def(
      "two_point",
      [](int d, const std::vector<std::int64_t>& x, int radius) {
        const auto green = extrapolated_green(d, radius);
        const double gamma = escape_probability(green).value;
        const double gamma_x = two_point_escape(green, as_point(x)).value;
        const auto race = race_probabilities_exact(gamma, gamma_x);
        py::dict out;
        out["gamma"] = gamma;
        out["gamma_x"] = gamma_x;
        out["q"] = race.q;
        out["s"] = race.s;
        return out;
      },
      py::arg("d"), py::arg("x"), py::arg("radius") = 0,
      "two-point escape probability and the exact first-passage race split");

  m.def(
      "enumerate_paths",
      [](int d, int n_max) {
        const auto res = enumerate_paths(d, n_max);
        py::dict out;
        out["d"] = res.d;
        out["n_max"] = res.n_max;
        py::list no_return;
        for (int n = 1; n <= res.n_max + 1; ++n) {
          py::dict r;
          r["n"] = n;
          r["fraction"] = res.no_return[n].str();
          r["value"] = res.no_return[n].value();
          no_return.append(r);
        }
        out["no_return"] = no_return;
        out["exact_counts"] = fraction_rows(res);
        py::list origin;
        for (int mm = 1; mm <= res.n_max; ++mm)
          for (int j = 0; j <= mm; ++j) {
            py::dict r;
            r["m"] = mm;
            r["j"] = j;
            r["fraction"] = res.origin_law[mm][j].str();
            r["value"] = res.origin_law[mm][j].value();
            origin.append(r);
          }
        out["origin_law"] = origin;
        return out;
      },
      py::arg("d"), py::arg("n_max"),
      "exact rational occupation laws from exhaustive path enumeration");
}
