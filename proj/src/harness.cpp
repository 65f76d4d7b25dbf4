#include "walklab/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "walklab/green.hpp"
#include "walklab/heavy.hpp"
#include "walklab/stats.hpp"
#include "walklab/version.hpp"

namespace walklab {

void validate(const ExperimentConfig& cfg) {
  if (cfg.kind != "slln" && cfg.kind != "limits" && cfg.kind != "variance")
    throw std::invalid_argument("kind must be slln, limits or variance");
  check_dim(cfg.d, 3);
  if (cfg.n_grid.empty()) throw std::invalid_argument("n grid is empty");
  // the level threshold needs log log n comfortably defined
  const std::uint64_t n_floor = cfg.kind == "slln" ? 16 : 2;
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < n_floor)
      throw std::invalid_argument("grid horizons must be >= " + std::to_string(n_floor));
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
      throw std::invalid_argument("n grid must be strictly increasing");
  }
  if (!(cfg.horizon_factor >= 1.0))
    throw std::invalid_argument("horizon factor must be >= 1");
  if (cfg.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (!(cfg.threshold_b > 0)) throw std::invalid_argument("threshold coefficient must be > 0");
  if (!(cfg.envelope_eps > 0)) throw std::invalid_argument("envelope slack must be > 0");
  if (cfg.workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::invalid_argument("format must be csv or json");
  const std::uint64_t n_max = cfg.n_grid.back();
  const double big = std::ceil(cfg.horizon_factor * static_cast<double>(n_max));
  if (big >= std::ldexp(1.0, 31))
    throw std::invalid_argument("lifetime horizon exceeds the 2^31 step cap");
}

void parallel_tasks(std::size_t count, int workers,
                    const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned w = workers > 0 ? static_cast<unsigned>(workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  w = std::min<std::size_t>(w, count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

const OracleConstants& oracle_constants(int d) {
  static std::mutex m;
  static std::map<int, OracleConstants> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  const auto green = extrapolated_green(d);
  const auto gamma = escape_probability(green);
  OracleConstants oc;
  oc.d = d;
  oc.gamma = gamma.value;
  oc.gamma_error = gamma.error;
  oc.lambda = lambda_of(gamma.value);
  oc.source = "box extrapolation r=(" + std::to_string(green.coarse.radius) + "," +
              std::to_string(green.fine.radius) + ") tol=" + format_double(green.coarse.tol);
  return cache.emplace(d, std::move(oc)).first->second;
}

namespace {

std::uint64_t lifetime_horizon(const ExperimentConfig& cfg, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      std::ceil(cfg.horizon_factor * static_cast<double>(n)));
}

constexpr char kFamilies[4] = {'q', 'u', 'r', 'v'};

}  // namespace

RunArtifacts run_slln(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto& oc = oracle_constants(cfg.d);
  const ThresholdParams th{oc.gamma, cfg.threshold_b};

  const std::size_t ng = cfg.n_grid.size();
  const std::size_t tasks = ng * cfg.replicas;
  std::vector<HeavyCounts> results(tasks);
  parallel_tasks(tasks, cfg.workers, [&](std::size_t idx) {
    const std::size_t gi = idx / cfg.replicas;
    const std::uint64_t rep = idx % cfg.replicas;
    const std::uint64_t n = cfg.n_grid[gi];
    results[idx] = heavy_counts(cfg.d, n, lifetime_horizon(cfg, n), cfg.seed, rep);
  });

  RunArtifacts art;
  art.kind = "slln";
  art.main_table = Table({"d", "n", "lifetime_horizon", "replica", "t", "exact_n",
                          "lifetime_exact", "at_least_n", "lifetime_at_least", "deficit",
                          "exact_ratio", "lifetime_exact_ratio", "at_least_ratio",
                          "lifetime_at_least_ratio"});
  Table sup({"n", "family", "replica", "level_cap", "sup_deviation"});
  Table med({"n", "family", "level_cap", "median_sup_deviation"});
  nlohmann::ordered_json level_info = nlohmann::ordered_json::array();

  for (std::size_t gi = 0; gi < ng; ++gi) {
    const std::uint64_t n = cfg.n_grid[gi];
    const int t_n = threshold_level(th, n);
    const double dn = static_cast<double>(n);
    level_info.push_back({{"n", n},
                          {"level", t_n},
                          {"psi", threshold_psi(th, n)}});

    std::array<std::vector<double>, 4> supdevs;  // per family, per replica
    for (auto& v : supdevs) v.reserve(cfg.replicas);

    for (std::uint64_t rep = 0; rep < cfg.replicas; ++rep) {
      const HeavyCounts& hc = results[gi * cfg.replicas + rep];
      std::array<double, 4> sup_here{0, 0, 0, 0};
      for (int t = 1; t <= t_n + 1; ++t) {
        const bool have = t <= hc.max_level();
        const HeavyLevelRow row = have ? hc.level(t) : HeavyLevelRow{t, 0, 0, 0, 0, 0};
        const double mu = mu_of(oc.gamma, t);
        const double ratios[4] = {
            static_cast<double>(row.exact_n) / (dn * oc.gamma * mu),
            static_cast<double>(row.lifetime_exact) / (dn * oc.gamma * mu),
            static_cast<double>(row.at_least_n) / (dn * mu),
            static_cast<double>(row.lifetime_at_least) / (dn * mu)};
        art.main_table.add({static_cast<std::int64_t>(cfg.d), hc.n, hc.horizon, rep,
                            static_cast<std::int64_t>(t), row.exact_n, row.lifetime_exact,
                            row.at_least_n, row.lifetime_at_least, row.deficit, ratios[0],
                            ratios[1], ratios[2], ratios[3]});
        if (t <= t_n)
          for (int f = 0; f < 4; ++f)
            sup_here[f] = std::max(sup_here[f], std::abs(ratios[f] - 1.0));
      }
      for (int f = 0; f < 4; ++f) {
        supdevs[f].push_back(sup_here[f]);
        sup.add({n, std::string(1, kFamilies[f]), rep,
                 static_cast<std::int64_t>(t_n), sup_here[f]});
      }
    }
    for (int f = 0; f < 4; ++f)
      med.add({n, std::string(1, kFamilies[f]), static_cast<std::int64_t>(t_n),
               median(supdevs[f])});
  }

  art.extra_tables.emplace_back("sup", std::move(sup));
  art.extra_tables.emplace_back("median", std::move(med));
  art.summary = {{"gamma", oc.gamma},
                 {"gamma_error", oc.gamma_error},
                 {"lambda", oc.lambda},
                 {"gamma_source", oc.source},
                 {"threshold_b", cfg.threshold_b},
                 {"levels", level_info}};
  return art;
}

RunArtifacts run_limits(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto& oc = oracle_constants(cfg.d);

  const std::size_t ng = cfg.n_grid.size();
  const std::size_t tasks = ng * cfg.replicas;
  std::vector<PathMaxStats> results(tasks);
  parallel_tasks(tasks, cfg.workers, [&](std::size_t idx) {
    const std::size_t gi = idx / cfg.replicas;
    const std::uint64_t rep = idx % cfg.replicas;
    const std::uint64_t n = cfg.n_grid[gi];
    results[idx] = path_max_stats(cfg.d, n, lifetime_horizon(cfg, n), cfg.seed, rep);
  });

  RunArtifacts art;
  art.kind = "limits";
  art.main_table =
      Table({"d", "n", "lifetime_horizon", "replica", "max_by_n", "max_lifetime",
             "log_n", "max_by_n_over_log", "max_lifetime_over_log", "lower_envelope",
             "envelope_ok"});
  Table summary_rows({"n", "mean_ratio", "min_ratio", "max_ratio", "envelope_pass",
                      "replicas"});

  for (std::size_t gi = 0; gi < ng; ++gi) {
    const std::uint64_t n = cfg.n_grid[gi];
    const double ln = std::log(static_cast<double>(n));
    const double lln = std::log(ln);
    const double envelope = oc.lambda * ln - (2.0 + cfg.envelope_eps) * lln;
    MeanVar ratio;
    double rmin = 1e300, rmax = -1e300;
    std::int64_t pass = 0;
    for (std::uint64_t rep = 0; rep < cfg.replicas; ++rep) {
      const PathMaxStats& ps = results[gi * cfg.replicas + rep];
      const double xr = ps.max_by_n / ln;
      const double er = ps.max_lifetime / ln;
      const bool ok = static_cast<double>(ps.max_by_n) >= envelope;
      art.main_table.add({static_cast<std::int64_t>(cfg.d), ps.n, ps.horizon, rep,
                          static_cast<std::uint64_t>(ps.max_by_n),
                          static_cast<std::uint64_t>(ps.max_lifetime), ln, xr, er,
                          envelope, static_cast<std::int64_t>(ok ? 1 : 0)});
      ratio.add(xr);
      rmin = std::min(rmin, xr);
      rmax = std::max(rmax, xr);
      pass += ok;
    }
    summary_rows.add({n, ratio.mean, rmin, rmax, pass,
                      static_cast<std::int64_t>(cfg.replicas)});
  }

  art.extra_tables.emplace_back("summary", std::move(summary_rows));
  art.summary = {{"gamma", oc.gamma},
                 {"gamma_error", oc.gamma_error},
                 {"lambda", oc.lambda},
                 {"gamma_source", oc.source},
                 {"envelope_eps", cfg.envelope_eps}};
  return art;
}

RunArtifacts run_variance(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.replicas < 30)
    throw std::invalid_argument("variance run needs >= 30 replicas");
  const auto& oc = oracle_constants(cfg.d);
  const ThresholdParams th{oc.gamma, cfg.threshold_b};

  const std::size_t ng = cfg.n_grid.size();
  const std::size_t tasks = ng * cfg.replicas;
  constexpr int kLevels = 2;  // t = 1, 2
  std::vector<std::array<std::int64_t, kLevels>> v_counts(tasks);
  parallel_tasks(tasks, cfg.workers, [&](std::size_t idx) {
    const std::size_t gi = idx / cfg.replicas;
    const std::uint64_t rep = idx % cfg.replicas;
    const std::uint64_t n = cfg.n_grid[gi];
    const HeavyCounts hc =
        heavy_counts(cfg.d, n, lifetime_horizon(cfg, n), cfg.seed, rep, purpose::kVariance);
    for (int t = 1; t <= kLevels; ++t)
      v_counts[idx][t - 1] = t <= hc.max_level() ? hc.level(t).lifetime_at_least : 0;
  });

  RunArtifacts art;
  art.kind = "variance";
  art.main_table = Table({"d", "t", "n", "replicas", "mu", "mean", "mean_sq_dev",
                          "sample_variance", "bound", "implied_constant", "in_fit"});
  Table fits({"d", "t", "fitted_constant", "implied_min", "implied_max",
              "stability_ratio"});

  for (int t = 1; t <= kLevels; ++t) {
    const double mu = mu_of(oc.gamma, t);
    double num = 0, den = 0;
    double imin = 1e300, imax = -1e300;
    for (std::size_t gi = 0; gi < ng; ++gi) {
      const std::uint64_t n = cfg.n_grid[gi];
      const double dn = static_cast<double>(n);
      // levels above the threshold are outside the theory's range
      const bool in_fit = t <= threshold_level(th, n);
      MeanVar mv;
      double msd = 0;
      for (std::uint64_t rep = 0; rep < cfg.replicas; ++rep) {
        const double v = static_cast<double>(v_counts[gi * cfg.replicas + rep][t - 1]);
        mv.add(v);
        const double dev = v - dn * mu;
        msd += dev * dev;
      }
      msd /= static_cast<double>(cfg.replicas);
      const double bound = dn * mu + mu * mu * std::pow(dn, 1.8);
      const double implied = msd / bound;
      art.main_table.add({static_cast<std::int64_t>(cfg.d), static_cast<std::int64_t>(t),
                          n, static_cast<std::int64_t>(cfg.replicas), mu, mv.mean, msd,
                          mv.sample_variance(), bound, implied,
                          static_cast<std::int64_t>(in_fit ? 1 : 0)});
      if (!in_fit) continue;
      num += msd * bound;
      den += bound * bound;
      imin = std::min(imin, implied);
      imax = std::max(imax, implied);
    }
    if (den > 0)
      fits.add({static_cast<std::int64_t>(cfg.d), static_cast<std::int64_t>(t), num / den,
                imin, imax, imax / imin});
  }

  art.extra_tables.emplace_back("fit", std::move(fits));
  art.summary = {{"gamma", oc.gamma},
                 {"gamma_error", oc.gamma_error},
                 {"lambda", oc.lambda},
                 {"gamma_source", oc.source},
                 {"bound_shape", "n*mu + mu^2*n^1.8"}};
  return art;
}

std::vector<std::string> write_tables(
    const Table& main, const std::vector<std::pair<std::string, Table>>& extras,
    const std::string& out, const std::string& format) {
  std::vector<std::string> written;
  if (out.empty()) return written;
  if (format == "csv") {
    write_text_atomic(out, render_csv(main));
    written.push_back(out);
    for (const auto& [suffix, table] : extras) {
      const std::string path = with_suffix(out, suffix);
      write_text_atomic(path, render_csv(table));
      written.push_back(path);
    }
  } else if (format == "json") {
    nlohmann::ordered_json doc;
    doc["main"] = render_json(main);
    for (const auto& [suffix, table] : extras) doc[suffix] = render_json(table);
    write_text_atomic(out, doc.dump(2) + "\n");
    written.push_back(out);
  } else {
    throw std::invalid_argument("format must be csv or json, got " + format);
  }
  return written;
}

std::string write_manifest(const std::string& out, const std::string& command,
                           const nlohmann::ordered_json& experiment,
                           const nlohmann::ordered_json& constants,
                           const std::vector<std::string>& outputs) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "walklab";
  manifest["version"] = kVersion;
  manifest["schema_version"] = kSchemaVersion;
  manifest["command"] = command;
  manifest["experiment"] = experiment;
  manifest["constants"] = constants;
  // outputs are recorded by name: they sit next to the manifest, and paths
  // would make otherwise identical runs produce different manifests
  nlohmann::ordered_json names = nlohmann::ordered_json::array();
  for (const auto& p : outputs) names.push_back(std::filesystem::path(p).filename().string());
  manifest["outputs"] = names;
  const std::string mpath = out + ".manifest.json";
  write_text_atomic(mpath, manifest.dump(2) + "\n");
  return mpath;
}

std::vector<std::string> write_artifacts(const RunArtifacts& art,
                                         const ExperimentConfig& cfg,
                                         const std::string& command) {
  if (cfg.out.empty()) return {};
  std::vector<std::string> written =
      write_tables(art.main_table, art.extra_tables, cfg.out, cfg.format);
  // worker count deliberately omitted: results are worker-independent
  const nlohmann::ordered_json experiment = {{"kind", art.kind},
                                             {"d", cfg.d},
                                             {"n_grid", cfg.n_grid},
                                             {"horizon_factor", cfg.horizon_factor},
                                             {"replicas", cfg.replicas},
                                             {"seed", cfg.seed},
                                             {"threshold_b", cfg.threshold_b},
                                             {"envelope_eps", cfg.envelope_eps},
                                             {"format", cfg.format}};
  written.push_back(write_manifest(cfg.out, command, experiment, art.summary, written));
  return written;
}

}  // namespace walklab
