#pragma once
// Experiment orchestration: replica scheduling over a worker pool with
// deterministic aggregation, the three standard study runs, and manifest
// assembly.  Results are identical for any worker count because every task
// writes to its own slot and the fold is done in task order.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "walklab/serialize.hpp"

namespace walklab {

struct ExperimentConfig {
  std::string kind;                    // slln | limits | variance
  int d = 3;
  std::vector<std::uint64_t> n_grid;
  double horizon_factor = 4.0;         // lifetime horizon N = ceil(factor * n)
  std::uint64_t replicas = 20;
  std::uint64_t seed = 1;
  double threshold_b = 3.0;            // log-log coefficient in the level pick
  double envelope_eps = 1.0;           // lower envelope uses (2 + eps)
  int workers = 0;                     // 0 = hardware concurrency
  std::string out;                     // output path ("" = no files)
  std::string format = "csv";          // csv | json
};

void validate(const ExperimentConfig& cfg);

// fn(i) for i in [0, count); exceptions propagate after all workers join
void parallel_tasks(std::size_t count, int workers,
                    const std::function<void(std::size_t)>& fn);

struct OracleConstants {
  int d = 0;
  double gamma = 0.0;
  double gamma_error = 0.0;
  double lambda = 0.0;
  std::string source;
};

// cached per process; one box-extrapolation solve per dimension
const OracleConstants& oracle_constants(int d);

struct RunArtifacts {
  std::string kind;
  Table main_table;
  std::vector<std::pair<std::string, Table>> extra_tables;  // suffix -> table
  nlohmann::ordered_json summary;  // constants and headline numbers
};

// per-level counts, ratios, sup-deviations, and their ensemble medians
RunArtifacts run_slln(const ExperimentConfig& cfg);
// per-replica maxima with envelope checks
RunArtifacts run_limits(const ExperimentConfig& cfg);
// mean-square deviation of the at-least-level counts against the bound shape
RunArtifacts run_variance(const ExperimentConfig& cfg);

// csv: `out` holds the main table, extras land next to it with their suffix.
// json: one document keyed "main" plus one key per extra table.
std::vector<std::string> write_tables(
    const Table& main, const std::vector<std::pair<std::string, Table>>& extras,
    const std::string& out, const std::string& format);

// Manifest at out + ".manifest.json" carrying command, config echo, constants,
// schema and code version.  Returns the manifest path.
std::string write_manifest(const std::string& out, const std::string& command,
                           const nlohmann::ordered_json& experiment,
                           const nlohmann::ordered_json& constants,
                           const std::vector<std::string>& outputs);

// Tables plus manifest for a standard run.  `command` is recorded verbatim.
// Returns all written paths.
std::vector<std::string> write_artifacts(const RunArtifacts& art,
                                         const ExperimentConfig& cfg,
                                         const std::string& command);

}  // namespace walklab
