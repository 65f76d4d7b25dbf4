#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "walklab/harness.hpp"
#include "walklab/heavy.hpp"
#include "walklab/stats.hpp"
#include "walklab/version.hpp"

using namespace walklab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_slln() {
  ExperimentConfig cfg;
  cfg.kind = "slln";
  cfg.n_grid = {16, 64};
  cfg.replicas = 4;
  cfg.seed = 5;
  cfg.workers = 1;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), {});
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("experiment validation rejects malformed configs") {
  auto ok = small_slln();
  CHECK_NOTHROW(validate(ok));

  auto bad = ok;
  bad.kind = "walks";
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.n_grid.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.n_grid = {8, 64};  // below the slln floor
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.kind = "limits";
  bad.n_grid = {8, 64};  // fine for the other kinds
  CHECK_NOTHROW(validate(bad));

  bad = ok;
  bad.n_grid = {64, 64};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.horizon_factor = 0.5;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.replicas = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.threshold_b = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.envelope_eps = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.workers = -1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.format = "yaml";
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = ok;
  bad.n_grid = {16, 1u << 30};
  bad.horizon_factor = 4.0;  // horizon would cross the step cap
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("the worker pool runs every task exactly once") {
  for (int workers : {0, 1, 3, 16}) {
    const std::size_t count = 37;
    std::vector<std::atomic<int>> hits(count);
    parallel_tasks(count, workers, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_NOTHROW(parallel_tasks(0, 4, [](std::size_t) { throw std::runtime_error("never"); }));
}

TEST_CASE("worker exceptions surface to the caller") {
  auto boom = [](std::size_t i) {
    if (i == 3) throw std::runtime_error("task 3 failed");
  };
  CHECK_THROWS_AS(parallel_tasks(8, 4, boom), std::runtime_error);
  CHECK_THROWS_AS(parallel_tasks(8, 1, boom), std::runtime_error);
}

TEST_CASE("escape constants come from the box solve and are cached") {
  const auto& oc = oracle_constants(3);
  CHECK(oc.d == 3);
  // return probability 0.340537; growth constant 0.928298
  CHECK(oc.gamma == doctest::Approx(0.6594661).epsilon(2e-3));
  CHECK(oc.lambda == doctest::Approx(0.9282978).epsilon(4e-3));
  CHECK(oc.gamma_error > 0);
  CHECK(oc.gamma_error < 1e-2);
  CHECK(oc.source.find("extrapolation") != std::string::npos);
  const auto& again = oracle_constants(3);
  CHECK(&oc == &again);  // same cached object
}

TEST_CASE("per-level study output is independent of the worker count") {
  auto cfg = small_slln();
  cfg.workers = 1;
  const auto one = run_slln(cfg);
  cfg.workers = 3;
  const auto three = run_slln(cfg);

  CHECK(render_csv(one.main_table) == render_csv(three.main_table));
  REQUIRE(one.extra_tables.size() == three.extra_tables.size());
  for (std::size_t i = 0; i < one.extra_tables.size(); ++i) {
    CHECK(one.extra_tables[i].first == three.extra_tables[i].first);
    CHECK(render_csv(one.extra_tables[i].second) ==
          render_csv(three.extra_tables[i].second));
  }
  CHECK(one.summary.dump() == three.summary.dump());
}

TEST_CASE("per-level study table structure and ratio arithmetic") {
  const auto cfg = small_slln();
  const auto art = run_slln(cfg);
  const auto& oc = oracle_constants(cfg.d);
  const ThresholdParams th{oc.gamma, cfg.threshold_b};

  std::size_t expected_rows = 0;
  for (auto n : cfg.n_grid)
    expected_rows += cfg.replicas * static_cast<std::size_t>(threshold_level(th, n) + 1);
  CHECK(art.main_table.rows.size() == expected_rows);
  REQUIRE(art.main_table.columns.size() == 14);

  for (const auto& row : art.main_table.rows) {
    const auto n = std::get<std::uint64_t>(row[1]);
    const auto t = std::get<std::int64_t>(row[4]);
    const auto exact_n = std::get<std::int64_t>(row[5]);
    const auto at_least = std::get<std::int64_t>(row[7]);
    const double mu = mu_of(oc.gamma, static_cast<int>(t));
    const double dn = static_cast<double>(n);
    CHECK(std::get<double>(row[10]) ==
          doctest::Approx(exact_n / (dn * oc.gamma * mu)).epsilon(1e-12));
    CHECK(std::get<double>(row[12]) ==
          doctest::Approx(at_least / (dn * mu)).epsilon(1e-12));
    CHECK(std::get<std::int64_t>(row[9]) >= 0);  // deficit
  }

  REQUIRE(art.extra_tables.size() == 2);
  const auto& sup = art.extra_tables[0].second;
  const auto& med = art.extra_tables[1].second;
  CHECK(art.extra_tables[0].first == "sup");
  CHECK(art.extra_tables[1].first == "median");
  CHECK(sup.rows.size() == cfg.n_grid.size() * cfg.replicas * 4);
  CHECK(med.rows.size() == cfg.n_grid.size() * 4);

  // the reported median is the median of the matching sup rows
  const auto& m0 = med.rows.front();
  std::vector<double> devs;
  for (const auto& row : sup.rows)
    if (std::get<std::uint64_t>(row[0]) == std::get<std::uint64_t>(m0[0]) &&
        std::get<std::string>(row[1]) == std::get<std::string>(m0[1]))
      devs.push_back(std::get<double>(row[4]));
  REQUIRE(devs.size() == cfg.replicas);
  CHECK(std::get<double>(m0[3]) == doctest::Approx(median(devs)).epsilon(1e-12));

  CHECK(art.summary.at("gamma").get<double>() == doctest::Approx(oc.gamma));
  CHECK(art.summary.at("levels").size() == cfg.n_grid.size());
}

TEST_CASE("path-maximum study rows carry a consistent envelope verdict") {
  ExperimentConfig cfg;
  cfg.kind = "limits";
  cfg.n_grid = {32, 128};
  cfg.replicas = 3;
  cfg.seed = 2;
  cfg.workers = 1;
  const auto art = run_limits(cfg);
  const auto& oc = oracle_constants(cfg.d);

  CHECK(art.main_table.rows.size() == cfg.n_grid.size() * cfg.replicas);
  std::int64_t ok_rows = 0;
  for (const auto& row : art.main_table.rows) {
    const auto n = std::get<std::uint64_t>(row[1]);
    const auto max_by_n = std::get<std::uint64_t>(row[4]);
    const auto max_life = std::get<std::uint64_t>(row[5]);
    CHECK(max_life >= max_by_n);
    const double ln = std::log(static_cast<double>(n));
    const double envelope = oc.lambda * ln - (2.0 + cfg.envelope_eps) * std::log(ln);
    CHECK(std::get<double>(row[9]) == doctest::Approx(envelope).epsilon(1e-12));
    const bool ok = static_cast<double>(max_by_n) >= envelope;
    CHECK(std::get<std::int64_t>(row[10]) == (ok ? 1 : 0));
    ok_rows += ok;
  }
  REQUIRE(art.extra_tables.size() == 1);
  std::int64_t pass_total = 0;
  for (const auto& row : art.extra_tables[0].second.rows)
    pass_total += std::get<std::int64_t>(row[4]);
  CHECK(pass_total == ok_rows);
}

TEST_CASE("variance study fits only below the level threshold") {
  ExperimentConfig cfg;
  cfg.kind = "variance";
  cfg.n_grid = {64, 256};
  cfg.replicas = 30;
  cfg.seed = 3;
  cfg.workers = 2;
  const auto art = run_variance(cfg);
  const auto& oc = oracle_constants(cfg.d);
  const ThresholdParams th{oc.gamma, cfg.threshold_b};

  CHECK(art.main_table.rows.size() == 2 * cfg.n_grid.size());  // t = 1, 2
  for (const auto& row : art.main_table.rows) {
    const auto t = static_cast<int>(std::get<std::int64_t>(row[1]));
    const auto n = std::get<std::uint64_t>(row[2]);
    const double mu = mu_of(oc.gamma, t);
    const double dn = static_cast<double>(n);
    const double bound = dn * mu + mu * mu * std::pow(dn, 1.8);
    CHECK(std::get<double>(row[8]) == doctest::Approx(bound).epsilon(1e-12));
    CHECK(std::get<double>(row[9]) ==
          doctest::Approx(std::get<double>(row[6]) / bound).epsilon(1e-12));
    CHECK(std::get<std::int64_t>(row[10]) ==
          ((t <= threshold_level(th, n)) ? 1 : 0));
  }

  // with these small horizons the threshold level is 1, so only t = 1 is fitted
  REQUIRE(art.extra_tables.size() == 1);
  const auto& fits = art.extra_tables[0].second;
  REQUIRE(fits.rows.size() == 1);
  CHECK(std::get<std::int64_t>(fits.rows[0][1]) == 1);
  CHECK(std::get<double>(fits.rows[0][5]) >= 1.0);  // stability ratio

  CHECK_THROWS_AS([&] {
    auto thin = cfg;
    thin.replicas = 10;
    run_variance(thin);
  }(), std::invalid_argument);
}

TEST_CASE("table writing lands main and suffixed files or one json document") {
  TempDir tmp("walklab_harness_write");
  Table main({"a", "b"});
  main.add({std::int64_t{1}, 2.5});
  Table extra({"c"});
  extra.add({std::string("x")});

  const auto base = (tmp.path / "res.csv").string();
  auto written = write_tables(main, {{"sup", extra}}, base, "csv");
  REQUIRE(written.size() == 2);
  CHECK(written[0] == base);
  CHECK(written[1] == (tmp.path / "res.sup.csv").string());
  CHECK(slurp(written[0]) == "a,b\n1,2.5\n");
  CHECK(slurp(written[1]) == "c\nx\n");
  for (const auto& e : fs::directory_iterator(tmp.path))
    CHECK(e.path().extension() != ".tmp");

  const auto jbase = (tmp.path / "res.json").string();
  written = write_tables(main, {{"sup", extra}}, jbase, "json");
  REQUIRE(written.size() == 1);
  const auto doc = nlohmann::json::parse(slurp(written[0]));
  REQUIRE(doc.contains("main"));
  REQUIRE(doc.contains("sup"));
  CHECK(doc["main"][0]["b"].get<double>() == doctest::Approx(2.5));
  CHECK(doc["sup"][0]["c"].get<std::string>() == "x");

  CHECK(write_tables(main, {}, "", "csv").empty());
}

TEST_CASE("artifact writing produces a manifest describing every file") {
  TempDir tmp("walklab_harness_artifacts");
  auto cfg = small_slln();
  cfg.out = (tmp.path / "slln.csv").string();
  const auto art = run_slln(cfg);
  const auto written = write_artifacts(art, cfg, "walklab slln --seed 5");

  REQUIRE(written.size() == 4);  // main, sup, median, manifest
  CHECK(written.back() == cfg.out + ".manifest.json");
  const auto manifest = nlohmann::json::parse(slurp(written.back()));
  CHECK(manifest["tool"] == "walklab");
  CHECK(manifest["version"] == kVersion);
  CHECK(manifest["schema_version"] == kSchemaVersion);
  CHECK(manifest["command"] == "walklab slln --seed 5");
  CHECK(manifest["experiment"]["kind"] == "slln");
  CHECK(manifest["experiment"]["replicas"] == 4);
  CHECK(!manifest["experiment"].contains("workers"));
  CHECK(manifest["constants"]["gamma"].get<double>() > 0.5);
  REQUIRE(manifest["outputs"].size() == 3);
  // outputs are recorded by basename, resolved against the manifest directory
  for (const auto& p : manifest["outputs"]) CHECK(fs::exists(tmp.path / p.get<std::string>()));

  // no-output configs write nothing
  auto quiet = cfg;
  quiet.out = "";
  CHECK(write_artifacts(art, quiet, "cmd").empty());
}
