// walklab command line tool.
//
// Subcommands: walk, gamma, hit, heavy, oracle, slln, limits, variance,
// identities.  Every run given --out writes its tables plus a manifest
// (configuration echo, oracle constants, code version) next to the output;
// files are written atomically.  The recorded command line is the canonical
// form reconstructed from the parsed configuration, so runs that differ only
// in worker count carry identical manifests and must produce identical files.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "walklab/enumeration.hpp"
#include "walklab/green.hpp"
#include "walklab/harness.hpp"
#include "walklab/heavy.hpp"
#include "walklab/hitting.hpp"
#include "walklab/serialize.hpp"
#include "walklab/version.hpp"
#include "walklab/walk.hpp"

namespace {

using namespace walklab;

// cells reject ',' so coordinates are joined with ';'
std::string coord_key(const LatticePoint& p) {
  std::ostringstream os;
  for (int i = 0; i < p.dim(); ++i) {
    if (i) os << ';';
    os << p.coords[i];
  }
  return os.str();
}

LatticePoint parse_target(const std::string& text, int d) {
  LatticePoint p = parse_point(text);
  if (p.dim() != d)
    throw std::invalid_argument("target " + text + " has dimension " +
                                std::to_string(p.dim()) + ", expected " + std::to_string(d));
  return p;
}

// grid tokens may use scientific notation ("1e5")
std::vector<std::uint64_t> parse_grid(const std::string& text) {
  std::vector<std::uint64_t> grid;
  std::string tok;
  std::istringstream is(text);
  while (std::getline(is, tok, ',')) {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size() || !(v >= 1) || v != std::floor(v) || v >= std::ldexp(1.0, 63))
      throw std::invalid_argument("bad grid entry: " + tok);
    grid.push_back(static_cast<std::uint64_t>(v));
  }
  if (grid.empty()) throw std::invalid_argument("empty grid");
  return grid;
}

std::string format_grid(const std::vector<std::uint64_t>& grid) {
  std::ostringstream os;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) os << ',';
    os << grid[i];
  }
  return os.str();
}

Table estimate_table() {
  return Table({"quantity", "d", "x", "horizon", "replicas", "value", "std_error",
                "censored_fraction"});
}

void add_estimate(Table& t, const std::string& quantity, int d, const std::string& x,
                  std::uint64_t horizon, std::uint64_t replicas, double value, double se,
                  double censored) {
  t.add({quantity, static_cast<std::int64_t>(d), x, horizon, replicas, value, se, censored});
}

Table law_table() {
  return Table({"d", "x", "horizon", "replicas", "censored", "j", "count"});
}

void add_law_rows(Table& t, const OccupationHistogram& h, const std::string& x) {
  for (std::size_t j = 0; j < h.counts.size(); ++j)
    t.add({static_cast<std::int64_t>(h.d), x, h.horizon, h.replicas, h.censored,
           static_cast<std::int64_t>(j), h.counts[j]});
}

struct Common {
  int dim = 3;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int workers = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_workers) {
  sub->add_option("--dim", c.dim, "lattice dimension")
      ->check(CLI::Range(3, kMaxDim))
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--out", c.out, "output path; a manifest is written next to it");
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  if (with_workers)
    sub->add_option("--workers", c.workers, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  sub->set_config("--config", "", "flat key=value file; command line overrides it");
}

// canonical command echo recorded in manifests; excludes --workers and --out
// so that reruns with different parallelism or paths stay comparable
std::string canonical(const std::string& sub, const std::vector<std::string>& parts,
                      const Common& c) {
  std::ostringstream os;
  os << "walklab " << sub << " --dim " << c.dim;
  for (const auto& p : parts) os << ' ' << p;
  os << " --seed " << c.seed << " --format " << c.format;
  return os.str();
}

void finish(const Common& c, const std::string& command, const Table& main,
            const std::vector<std::pair<std::string, Table>>& extras,
            const nlohmann::ordered_json& experiment,
            const nlohmann::ordered_json& constants) {
  if (c.out.empty()) return;
  auto written = write_tables(main, extras, c.out, c.format);
  written.push_back(write_manifest(c.out, command, experiment, constants, written));
  for (const auto& p : written) std::cout << "wrote " << p << "\n";
}

void print_artifact_paths(const std::vector<std::string>& written) {
  for (const auto& p : written) std::cout << "wrote " << p << "\n";
}

nlohmann::ordered_json oracle_json(const OracleConstants& oc) {
  return {{"gamma", oc.gamma},
          {"gamma_error", oc.gamma_error},
          {"lambda", oc.lambda},
          {"gamma_source", oc.source}};
}

// first-order error propagation through the exact race split
struct RaceWithErrors {
  double q = 0, s = 0, q_err = 0, s_err = 0;
};

RaceWithErrors race_with_errors(double g, double g_err, double gx, double gx_err) {
  const RaceProbabilities qs = race_probabilities_exact(g, gx);
  const double denom = gx * (2.0 - gx);
  const double dq_dg = -1.0 / denom;
  const double dq_dgx = 2.0 * g * (1.0 - gx) / (denom * denom);
  const double ds_dg = -(1.0 - gx) * dq_dg;
  const double ds_dgx = -(1.0 - qs.q) - (1.0 - gx) * dq_dgx;
  RaceWithErrors r;
  r.q = qs.q;
  r.s = qs.s;
  r.q_err = std::abs(dq_dg) * g_err + std::abs(dq_dgx) * gx_err;
  r.s_err = std::abs(ds_dg) * g_err + std::abs(ds_dgx) * gx_err;
  return r;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"random-walk occupation statistics laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // ---- walk ----
  auto* walk_cmd = app.add_subcommand("walk", "simulate one walk and report its ledger");
  Common walk_c;
  add_common(walk_cmd, walk_c, false);
  std::uint64_t walk_steps = 1000;
  std::uint64_t walk_replica = 0;
  bool walk_dump = false;
  walk_cmd->add_option("--steps", walk_steps, "number of steps")->required();
  walk_cmd->add_option("--replica", walk_replica, "replica index")->capture_default_str();
  walk_cmd->add_flag("--dump", walk_dump, "write the raw trajectory instead of the summary");
  walk_cmd->callback([&] {
    WalkConfig cfg{walk_c.dim, walk_steps, walk_c.seed, walk_replica, {}};
    if (walk_dump) {
      if (walk_c.out.empty()) {
        write_trajectory(cfg, std::cout);
      } else {
        std::ostringstream os;
        write_trajectory(cfg, os);
        write_text_atomic(walk_c.out, os.str());
        std::cout << "wrote " << walk_c.out << "\n";
      }
      return;
    }
    const LocalTimeLedger led = simulate(cfg);
    const auto [mx, witness] = led.max_local_time();
    Table t({"d", "steps", "seed", "replica", "distinct_sites", "max_count", "witness"});
    t.add({static_cast<std::int64_t>(cfg.d), cfg.steps, cfg.seed, cfg.replica,
           led.distinct_sites(), mx, coord_key(witness)});
    std::cout << "walk d=" << cfg.d << " steps=" << cfg.steps << " distinct="
              << led.distinct_sites() << " max_count=" << mx << " at "
              << format_point(witness) << "\n";
    const auto cmd = canonical("walk", {"--steps", std::to_string(walk_steps), "--replica",
                                        std::to_string(walk_replica)},
                               walk_c);
    finish(walk_c, cmd, t, {},
           {{"kind", "walk"},
            {"d", cfg.d},
            {"steps", cfg.steps},
            {"replica", cfg.replica},
            {"seed", cfg.seed},
            {"format", walk_c.format}},
           nlohmann::ordered_json::object());
  });

  // ---- gamma ----
  auto* gamma_cmd = app.add_subcommand("gamma", "escape probability estimates");
  Common gamma_c;
  add_common(gamma_cmd, gamma_c, false);
  std::uint64_t gamma_horizon = 1000000, gamma_replicas = 10000;
  std::vector<std::uint64_t> gamma_finite;
  gamma_cmd->add_option("--horizon", gamma_horizon, "step bound standing in for infinity")
      ->capture_default_str();
  gamma_cmd->add_option("--replicas", gamma_replicas, "replica count")->capture_default_str();
  gamma_cmd->add_option("--n", gamma_finite,
                        "also report the exact finite-horizon escape at these step counts");
  gamma_cmd->callback([&] {
    Table t = estimate_table();
    for (const auto n : gamma_finite) {
      const auto est = escape_by(gamma_c.dim, n, gamma_replicas, gamma_c.seed);
      add_estimate(t, "escape_by_n", est.d, "", n, est.replicas, est.value, est.std_error,
                   0.0);
      std::cout << "escape_by_n n=" << n << ": " << est.value << " +- " << est.std_error
                << "\n";
    }
    const auto est = escape_estimate(gamma_c.dim, gamma_horizon, gamma_replicas, gamma_c.seed);
    add_estimate(t, "escape", est.d, "", est.horizon, est.replicas, est.value, est.std_error,
                 est.value);
    const auto ci = wilson_interval(
        static_cast<std::uint64_t>(std::llround(est.value * static_cast<double>(est.replicas))),
        est.replicas);
    std::cout << "escape d=" << est.d << " horizon=" << est.horizon << ": " << est.value
              << " +- " << est.std_error << "  (95% CI " << ci.lo << ".." << ci.hi
              << "), truncation bias O(horizon^" << est.bias_exponent << ")\n";
    std::vector<std::string> parts = {"--horizon", std::to_string(gamma_horizon),
                                      "--replicas", std::to_string(gamma_replicas)};
    for (const auto n : gamma_finite) {
      parts.push_back("--n");
      parts.push_back(std::to_string(n));
    }
    finish(gamma_c, canonical("gamma", parts, gamma_c), t, {},
           {{"kind", "gamma"},
            {"d", gamma_c.dim},
            {"horizon", gamma_horizon},
            {"replicas", gamma_replicas},
            {"finite_n", gamma_finite},
            {"seed", gamma_c.seed},
            {"format", gamma_c.format}},
           nlohmann::ordered_json::object());
  });

  // ---- hit ----
  auto* hit_cmd = app.add_subcommand("hit", "two-point races and occupation laws");
  Common hit_c;
  add_common(hit_cmd, hit_c, false);
  std::string hit_target = "1,0,0";
  std::string hit_mode = "race";
  std::uint64_t hit_horizon = 1000000, hit_replicas = 10000;
  bool hit_nofit = false;
  hit_cmd->add_option("--target", hit_target, "target point, comma separated")
      ->capture_default_str();
  hit_cmd->add_option("--mode", hit_mode, "experiment")
      ->check(CLI::IsMember({"race", "avoid", "law-origin", "law-pair", "law-before-return"}))
      ->capture_default_str();
  hit_cmd->add_option("--horizon", hit_horizon, "censoring horizon")->capture_default_str();
  hit_cmd->add_option("--replicas", hit_replicas, "replica count")->capture_default_str();
  hit_cmd->add_flag("--no-fit", hit_nofit, "skip the oracle-based law fit");
  hit_cmd->callback([&] {
    const int d = hit_c.dim;
    const LatticePoint x = parse_target(hit_target, d);
    const std::string xk = coord_key(x);
    nlohmann::ordered_json constants = nlohmann::ordered_json::object();
    Table main = estimate_table();
    std::vector<std::pair<std::string, Table>> extras;

    if (hit_mode == "race") {
      const RaceEstimate re = race_estimate(d, x, hit_horizon, hit_replicas, hit_c.seed);
      add_estimate(main, "return_before_target", d, xk, re.horizon, re.replicas, re.q,
                   re.q_se, re.censored_fraction);
      add_estimate(main, "target_before_return", d, xk, re.horizon, re.replicas, re.s,
                   re.s_se, re.censored_fraction);
      std::cout << "race vs " << format_point(x) << ": return-first " << re.q << " +- "
                << re.q_se << ", target-first " << re.s << " +- " << re.s_se << ", censored "
                << re.censored_fraction << "\n";
    } else if (hit_mode == "avoid") {
      const auto est = target_avoidance(d, x, hit_horizon, hit_replicas, hit_c.seed);
      add_estimate(main, "target_avoidance", d, xk, est.horizon, est.replicas, est.value,
                   est.std_error, est.value);
      std::cout << "avoidance of " << format_point(x) << ": " << est.value << " +- "
                << est.std_error << "\n";
    } else {
      // occupation laws; the fit ratio comes from the potential oracle
      std::optional<double> ratio;
      if (!hit_nofit && hit_mode != "law-before-return") {
        const auto& oc = oracle_constants(d);
        constants = oracle_json(oc);
        if (hit_mode == "law-origin") {
          ratio = 1.0 - oc.gamma;
        } else {
          const auto green = extrapolated_green(d);
          const auto gx = two_point_escape(green, x);
          const auto qs = race_probabilities_exact(oc.gamma, gx.value);
          ratio = qs.q + qs.s;
          constants["gamma_x"] = gx.value;
          constants["gamma_x_error"] = gx.error;
        }
      }
      OccupationLawReport rep;
      std::string xcol;
      if (hit_mode == "law-origin") {
        rep = origin_occupation_law(d, hit_horizon, hit_replicas, hit_c.seed, ratio);
      } else if (hit_mode == "law-pair") {
        rep = pair_occupation_law(d, x, hit_horizon, hit_replicas, hit_c.seed, ratio);
        xcol = xk;
      } else {
        rep = visits_before_return_law(d, x, hit_horizon, hit_replicas, hit_c.seed);
        xcol = xk;
      }
      main = law_table();
      add_law_rows(main, rep.hist, xcol);
      const double cens = static_cast<double>(rep.hist.censored) /
                          static_cast<double>(rep.hist.replicas);
      std::cout << hit_mode << ": " << rep.hist.counts.size() << " occupation levels, "
                << "censored fraction " << cens << "\n";
      if (rep.gof) {
        constants["geom_ratio"] = rep.geom_ratio;
        constants["chi_square"] = rep.gof->statistic;
        constants["df"] = rep.gof->df;
        constants["p_value"] = rep.gof->p_value;
        constants["bins_used"] = rep.gof->bins_used;
        std::cout << "  geometric fit ratio " << rep.geom_ratio << ": chi2 = "
                  << rep.gof->statistic << " on " << rep.gof->df << " df, p = "
                  << rep.gof->p_value << "\n";
      }
      if (hit_mode == "law-before-return") {
        // j >= 1 tail should decay geometrically with the return-race ratio
        std::vector<double> js, logs;
        for (std::size_t j = 1; j < rep.hist.counts.size(); ++j)
          if (rep.hist.counts[j] >= 5) {
            js.push_back(static_cast<double>(j));
            logs.push_back(std::log(static_cast<double>(rep.hist.counts[j])));
          }
        if (js.size() >= 2) {
          const auto fit = linear_fit(js, logs);
          constants["tail_ratio_fit"] = std::exp(fit.slope);
          constants["tail_fit_r2"] = fit.r2;
          std::cout << "  tail decay ratio (log-linear fit) " << std::exp(fit.slope)
                    << ", r2 " << fit.r2 << "\n";
        }
      }
    }
    finish(hit_c,
           canonical("hit",
                     {"--mode", hit_mode, "--target", xk, "--horizon",
                      std::to_string(hit_horizon), "--replicas", std::to_string(hit_replicas),
                      std::string("--no-fit=") + (hit_nofit ? "1" : "0")},
                     hit_c),
           main, extras,
           {{"kind", "hit"},
            {"mode", hit_mode},
            {"d", d},
            {"target", xk},
            {"horizon", hit_horizon},
            {"replicas", hit_replicas},
            {"seed", hit_c.seed},
            {"format", hit_c.format}},
           constants);
  });

  // ---- heavy ----
  auto* heavy_cmd = app.add_subcommand("heavy", "per-level occupation counts for one walk");
  Common heavy_c;
  add_common(heavy_cmd, heavy_c, false);
  std::uint64_t heavy_steps = 0, heavy_replica = 0;
  double heavy_factor = 4.0, heavy_b = 3.0;
  heavy_cmd->add_option("--steps", heavy_steps, "short horizon n")->required();
  heavy_cmd->add_option("--factor", heavy_factor, "lifetime horizon factor, N = ceil(c*n)")
      ->check(CLI::Range(1.0, 1e9))
      ->capture_default_str();
  heavy_cmd->add_option("--replica", heavy_replica, "replica index")->capture_default_str();
  heavy_cmd->add_option("--B", heavy_b, "log-log coefficient of the level threshold")
      ->capture_default_str();
  heavy_cmd->callback([&] {
    const std::uint64_t big_n = static_cast<std::uint64_t>(
        std::ceil(heavy_factor * static_cast<double>(heavy_steps)));
    const HeavyCounts hc =
        heavy_counts(heavy_c.dim, heavy_steps, big_n, heavy_c.seed, heavy_replica);
    const auto& oc = oracle_constants(heavy_c.dim);
    const ThresholdParams th{oc.gamma, heavy_b};
    const double dn = static_cast<double>(hc.n);

    Table t({"d", "n", "lifetime_horizon", "replica", "t", "exact_n", "lifetime_exact",
             "at_least_n", "lifetime_at_least", "deficit", "exact_ratio",
             "lifetime_exact_ratio", "at_least_ratio", "lifetime_at_least_ratio"});
    for (int lvl = 1; lvl <= hc.max_level(); ++lvl) {
      const auto& row = hc.level(lvl);
      const double mu = mu_of(oc.gamma, lvl);
      t.add({static_cast<std::int64_t>(hc.d), hc.n, hc.horizon, hc.replica,
             static_cast<std::int64_t>(lvl), row.exact_n, row.lifetime_exact, row.at_least_n,
             row.lifetime_at_least, row.deficit,
             static_cast<double>(row.exact_n) / (dn * oc.gamma * mu),
             static_cast<double>(row.lifetime_exact) / (dn * oc.gamma * mu),
             static_cast<double>(row.at_least_n) / (dn * mu),
             static_cast<double>(row.lifetime_at_least) / (dn * mu)});
    }
    const int t_n = hc.n >= 2 ? threshold_level(th, hc.n) : 1;
    std::cout << "heavy d=" << hc.d << " n=" << hc.n << " N=" << hc.horizon << ": distinct "
              << hc.distinct_by_n << ", max level " << hc.max_level() << ", threshold level "
              << t_n << "\n";
    nlohmann::ordered_json constants = oracle_json(oc);
    constants["threshold_b"] = heavy_b;
    constants["threshold_level"] = t_n;
    if (hc.n >= 2) constants["threshold_psi"] = threshold_psi(th, hc.n);
    finish(heavy_c,
           canonical("heavy",
                     {"--steps", std::to_string(heavy_steps), "--factor",
                      format_double(heavy_factor), "--replica", std::to_string(heavy_replica),
                      "--B", format_double(heavy_b)},
                     heavy_c),
           t, {},
           {{"kind", "heavy"},
            {"d", heavy_c.dim},
            {"n", heavy_steps},
            {"lifetime_horizon", big_n},
            {"horizon_factor", heavy_factor},
            {"replica", heavy_replica},
            {"threshold_b", heavy_b},
            {"seed", heavy_c.seed},
            {"format", heavy_c.format}},
           constants);
  });

  // ---- oracle ----
  auto* oracle_cmd =
      app.add_subcommand("oracle", "potential values, exact constants, path enumeration");
  Common oracle_c;
  add_common(oracle_cmd, oracle_c, false);
  int oracle_radius = 0;
  int oracle_enum = 0;
  std::uint64_t oracle_budget = 100000000ull;
  std::vector<std::string> oracle_points;
  oracle_cmd->add_option("--radius", oracle_radius, "coarse box radius, 0 = default")
      ->capture_default_str();
  oracle_cmd->add_option("--point", oracle_points, "extra points to evaluate");
  oracle_cmd
      ->add_option("--enumerate", oracle_enum, "exhaustive path horizon, 0 = off")
      ->capture_default_str();
  oracle_cmd->add_option("--budget", oracle_budget, "enumeration node budget")
      ->capture_default_str();
  oracle_cmd->callback([&] {
    const int d = oracle_c.dim;
    const auto green = extrapolated_green(d, oracle_radius);
    const auto gamma = escape_probability(green);
    const double lambda = lambda_of(gamma.value);
    const double lambda_err =
        lambda * lambda / (1.0 - gamma.value) * gamma.error;

    std::vector<LatticePoint> pts;
    pts.push_back(LatticePoint::origin(d));
    LatticePoint e1 = LatticePoint::origin(d);
    e1.coords[0] = 1;
    pts.push_back(e1);
    LatticePoint diag = LatticePoint::origin(d);
    diag.coords[0] = diag.coords[1] = 1;
    pts.push_back(diag);
    LatticePoint e1x2 = LatticePoint::origin(d);
    e1x2.coords[0] = 2;
    pts.push_back(e1x2);
    for (const auto& s : oracle_points) pts.push_back(parse_target(s, d));

    Table main({"d", "x", "green", "error"});
    Table consts({"name", "x", "value", "error"});
    consts.add({std::string("gamma"), std::string(), gamma.value, gamma.error});
    consts.add({std::string("lambda"), std::string(), lambda, lambda_err});
    for (const auto& p : pts) {
      main.add({static_cast<std::int64_t>(d), coord_key(p), green.at(p), green.error_at(p)});
      if (p.is_origin()) continue;
      const auto gx = two_point_escape(green, p);
      consts.add({std::string("two_point_escape"), coord_key(p), gx.value, gx.error});
      const auto qs = race_with_errors(gamma.value, gamma.error, gx.value, gx.error);
      consts.add({std::string("return_before_target"), coord_key(p), qs.q, qs.q_err});
      consts.add({std::string("target_before_return"), coord_key(p), qs.s, qs.s_err});
    }
    std::vector<std::pair<std::string, Table>> extras;
    extras.emplace_back("constants", std::move(consts));

    std::cout << "oracle d=" << d << " radii (" << green.coarse.radius << ","
              << green.fine.radius << "): G(0) = " << green.at(LatticePoint::origin(d))
              << " +- " << green.error_at(LatticePoint::origin(d)) << "\n";
    std::cout << "  escape gamma = " << gamma.value << " +- " << gamma.error
              << "  (return probability " << 1.0 - gamma.value << ")\n";
    std::cout << "  lambda = " << lambda << " +- " << lambda_err << "\n";

    if (oracle_enum > 0) {
      const auto res = enumerate_paths(d, oracle_enum, oracle_budget);
      Table en({"kind", "m", "index", "exact", "value"});
      for (int m = 1; m <= res.n_max + 1; ++m)
        en.add({std::string("no_return"), static_cast<std::int64_t>(m),
                static_cast<std::int64_t>(0), res.no_return[m].str(),
                res.no_return[m].value()});
      for (int m = 1; m <= res.n_max; ++m)
        for (int k = 1; k <= m; ++k)
          en.add({std::string("exact_count"), static_cast<std::int64_t>(m),
                  static_cast<std::int64_t>(k), res.exact_count[m][k].str(),
                  res.exact_count[m][k].value()});
      for (int m = 1; m <= res.n_max; ++m)
        for (int j = 0; j <= m; ++j)
          en.add({std::string("origin_law"), static_cast<std::int64_t>(m),
                  static_cast<std::int64_t>(j), res.origin_law[m][j].str(),
                  res.origin_law[m][j].value()});
      extras.emplace_back("enumeration", std::move(en));
      std::cout << "  enumeration to " << res.n_max << " steps: no-return chain ends at "
                << res.no_return[res.n_max + 1].str() << "\n";
    }

    nlohmann::ordered_json constants = {
        {"gamma", gamma.value},
        {"gamma_error", gamma.error},
        {"lambda", lambda},
        {"lambda_error", lambda_err},
        {"radii", {green.coarse.radius, green.fine.radius}},
        {"trusted_radius", green.trusted_radius},
        {"solver_tol", green.coarse.tol},
        {"iterations", {green.coarse.iterations, green.fine.iterations}}};
    std::vector<std::string> parts = {"--radius", std::to_string(green.coarse.radius)};
    for (const auto& p : pts) {
      parts.push_back("--point");
      parts.push_back(coord_key(p));
    }
    if (oracle_enum > 0) {
      parts.push_back("--enumerate");
      parts.push_back(std::to_string(oracle_enum));
    }
    finish(oracle_c, canonical("oracle", parts, oracle_c), main, extras,
           {{"kind", "oracle"},
            {"d", d},
            {"radius", green.coarse.radius},
            {"enumerate", oracle_enum},
            {"seed", oracle_c.seed},
            {"format", oracle_c.format}},
           constants);
  });

  // ---- identities ----
  auto* id_cmd = app.add_subcommand(
      "identities", "first-passage identity residuals, oracle and Monte Carlo");
  Common id_c;
  add_common(id_cmd, id_c, false);
  std::vector<std::string> id_targets;
  std::uint64_t id_horizon = 1000000, id_replicas = 20000;
  id_cmd->add_option("--target", id_targets, "target points, repeatable");
  id_cmd->add_option("--horizon", id_horizon, "censoring horizon")->capture_default_str();
  id_cmd->add_option("--replicas", id_replicas, "replica count")->capture_default_str();
  id_cmd->callback([&] {
    const int d = id_c.dim;
    std::vector<LatticePoint> targets;
    if (id_targets.empty()) {
      LatticePoint e1 = LatticePoint::origin(d);
      e1.coords[0] = 1;
      targets.push_back(e1);
      LatticePoint e1x2 = LatticePoint::origin(d);
      e1x2.coords[0] = 2;
      targets.push_back(e1x2);
    } else {
      for (const auto& s : id_targets) targets.push_back(parse_target(s, d));
    }

    const auto green = extrapolated_green(d);
    const auto gamma = escape_probability(green);
    Table est = estimate_table();
    Table res({"source", "identity", "d", "x", "residual", "std_error", "z"});

    // exact inputs: residuals must vanish to rounding
    for (const auto& x : targets) {
      const auto gx = two_point_escape(green, x);
      const auto qs = race_probabilities_exact(gamma.value, gx.value);
      HittingRates exact;
      exact.gamma = gamma.value;
      exact.gamma_x = gx.value;
      exact.q = qs.q;
      exact.s = qs.s;
      for (const auto& r : identity_residuals(exact))
        res.add({std::string("oracle"), r.name, static_cast<std::int64_t>(d), coord_key(x),
                 r.residual, r.se, r.z});
    }

    // one coupled ensemble serves every target
    const auto coupled =
        coupled_hitting_estimates(d, targets, id_horizon, id_replicas, id_c.seed);
    double worst_z = 0.0;
    for (const auto& c : coupled) {
      const std::string xk = coord_key(c.target);
      const HittingRates rates = HittingRates::from_coupled(c);
      add_estimate(est, "escape", d, "", c.horizon, c.replicas, rates.gamma, rates.gamma_se,
                   rates.gamma);
      add_estimate(est, "target_avoidance", d, xk, c.horizon, c.replicas, rates.gamma_x,
                   rates.gamma_x_se, rates.gamma_x);
      add_estimate(est, "return_before_target", d, xk, c.horizon, c.replicas, rates.q,
                   rates.q_se, c.race_censored_fraction);
      add_estimate(est, "target_before_return", d, xk, c.horizon, c.replicas, rates.s,
                   rates.s_se, c.race_censored_fraction);
      for (const auto& r : identity_residuals(rates)) {
        res.add({std::string("mc"), r.name, static_cast<std::int64_t>(d), xk, r.residual,
                 r.se, r.z});
        worst_z = std::max(worst_z, std::abs(r.z));
      }
      std::cout << "target " << format_point(c.target) << ": gamma_x " << rates.gamma_x
                << " +- " << rates.gamma_x_se << ", q " << rates.q << " +- " << rates.q_se
                << ", s " << rates.s << " +- " << rates.s_se << "\n";
    }
    std::cout << "worst Monte Carlo identity |z| = " << worst_z << "\n";

    nlohmann::ordered_json constants = oracle_json(oracle_constants(d));
    std::vector<std::string> parts;
    for (const auto& x : targets) {
      parts.push_back("--target");
      parts.push_back(coord_key(x));
    }
    parts.push_back("--horizon");
    parts.push_back(std::to_string(id_horizon));
    parts.push_back("--replicas");
    parts.push_back(std::to_string(id_replicas));
    std::vector<std::pair<std::string, Table>> extras;
    extras.emplace_back("residuals", std::move(res));
    finish(id_c, canonical("identities", parts, id_c), est, extras,
           {{"kind", "identities"},
            {"d", d},
            {"targets", [&] {
               std::vector<std::string> v;
               for (const auto& x : targets) v.push_back(coord_key(x));
               return v;
             }()},
            {"horizon", id_horizon},
            {"replicas", id_replicas},
            {"seed", id_c.seed},
            {"format", id_c.format}},
           constants);
  });

  // ---- experiment runs: slln, limits, variance ----
  struct ExperimentCli {
    CLI::App* sub = nullptr;
    Common common;
    std::string grid;
    std::uint64_t replicas = 20;
    double factor = 4.0, b = 3.0, eps = 1.0;
  };
  auto add_experiment = [&](const char* name, const char* help, std::uint64_t def_replicas,
                            const char* def_grid) {
    auto cli = std::make_shared<ExperimentCli>();
    cli->sub = app.add_subcommand(name, help);
    cli->replicas = def_replicas;
    cli->grid = def_grid;
    add_common(cli->sub, cli->common, true);
    cli->sub->add_option("--grid", cli->grid, "comma separated step counts")
        ->capture_default_str();
    cli->sub->add_option("--replicas", cli->replicas, "replicas per grid point")
        ->capture_default_str();
    cli->sub->add_option("--factor", cli->factor, "lifetime horizon factor")
        ->capture_default_str();
    cli->sub->add_option("--B", cli->b, "log-log coefficient of the level threshold")
        ->capture_default_str();
    cli->sub->add_option("--eps", cli->eps, "lower envelope slack")->capture_default_str();
    return cli;
  };
  auto make_config = [](const ExperimentCli& cli, const std::string& kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.d = cli.common.dim;
    cfg.n_grid = parse_grid(cli.grid);
    cfg.horizon_factor = cli.factor;
    cfg.replicas = cli.replicas;
    cfg.seed = cli.common.seed;
    cfg.threshold_b = cli.b;
    cfg.envelope_eps = cli.eps;
    cfg.workers = cli.common.workers;
    cfg.out = cli.common.out;
    cfg.format = cli.common.format;
    return cfg;
  };
  auto experiment_command = [](const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "walklab " << cfg.kind << " --dim " << cfg.d << " --grid "
       << format_grid(cfg.n_grid) << " --replicas " << cfg.replicas << " --factor "
       << format_double(cfg.horizon_factor) << " --B " << format_double(cfg.threshold_b)
       << " --eps " << format_double(cfg.envelope_eps) << " --seed " << cfg.seed
       << " --format " << cfg.format;
    return os.str();
  };

  auto slln_cli = add_experiment("slln", "uniform law-of-large-numbers convergence tables",
                                 20, "10000,100000,1000000");
  slln_cli->sub->callback([&, slln_cli] {
    const auto cfg = make_config(*slln_cli, "slln");
    const auto art = run_slln(cfg);
    // ensemble medians, one line per (n, family)
    const auto& med = art.extra_tables[1].second;
    for (const auto& row : med.rows)
      std::cout << "n=" << std::get<std::uint64_t>(row[0]) << " family "
                << std::get<std::string>(row[1]) << " level cap "
                << std::get<std::int64_t>(row[2]) << ": median sup deviation "
                << std::get<double>(row[3]) << "\n";
    print_artifact_paths(write_artifacts(art, cfg, experiment_command(cfg)));
  });

  auto limits_cli = add_experiment("limits", "maximal occupation growth against log n", 20,
                                   "10000,100000,1000000");
  limits_cli->sub->callback([&, limits_cli] {
    const auto cfg = make_config(*limits_cli, "limits");
    const auto art = run_limits(cfg);
    const auto& sum = art.extra_tables[0].second;
    for (const auto& row : sum.rows)
      std::cout << "n=" << std::get<std::uint64_t>(row[0]) << ": max/log n mean "
                << std::get<double>(row[1]) << " range [" << std::get<double>(row[2]) << ", "
                << std::get<double>(row[3]) << "], envelope pass "
                << std::get<std::int64_t>(row[4]) << "/" << std::get<std::int64_t>(row[5])
                << "\n";
    print_artifact_paths(write_artifacts(art, cfg, experiment_command(cfg)));
  });

  auto variance_cli = add_experiment(
      "variance", "across-replica variance of lifetime counts against the bound shape", 30,
      "10000,100000,1000000");
  variance_cli->sub->callback([&, variance_cli] {
    const auto cfg = make_config(*variance_cli, "variance");
    const auto art = run_variance(cfg);
    const auto& fit = art.extra_tables[0].second;
    for (const auto& row : fit.rows)
      std::cout << "t=" << std::get<std::int64_t>(row[1]) << ": fitted constant "
                << std::get<double>(row[2]) << ", implied range ["
                << std::get<double>(row[3]) << ", " << std::get<double>(row[4])
                << "], stability ratio " << std::get<double>(row[5]) << "\n";
    print_artifact_paths(write_artifacts(art, cfg, experiment_command(cfg)));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
