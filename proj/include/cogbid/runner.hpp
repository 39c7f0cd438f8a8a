#pragma once

// Batch execution over (scenario, seed) pairs and the files it writes.
//
// Layout under the output directory:
//   <scenario>/seed_<n>.csv            per-slot log, one row per slot and SU
//   <scenario>/seed_<n>.summary.json   trailing-window summary
//   aggregate.json                     cross-seed mean/std per scenario and SU
//   report.txt                         the aggregate as text tables

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogbid/sim.hpp"

namespace cogbid::runner {

enum class LogFormat { csv, tsv, none };

struct RunRequest {
  std::vector<sim::ScenarioConfig> scenarios;
  std::vector<std::uint64_t> seeds;
  std::optional<int> horizon;
  std::optional<int> window;
  std::filesystem::path out_dir;
  LogFormat format = LogFormat::csv;
  int threads = 1;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single seed
  bool operator==(const MeanStd&) const = default;
};

struct SuAggregate {
  std::string policy;
  MeanStd loss_rate_pct;
  MeanStd avg_tax;
  MeanStd avg_cost;
  bool operator==(const SuAggregate&) const = default;
};

struct ScenarioAggregate {
  std::string scenario;
  std::vector<std::uint64_t> seeds;
  std::vector<SuAggregate> sus;
  bool operator==(const ScenarioAggregate&) const = default;
};

struct ExecuteResult {
  int exit_code = 0;
  std::vector<ScenarioAggregate> aggregates;
  std::vector<std::string> errors;
};

MeanStd mean_std(std::span<const double> xs);

/// Aggregates per-seed summaries of one scenario.
ScenarioAggregate aggregate(const sim::ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                            std::span<const sim::SummaryStats> summaries);

void write_log(std::ostream& out, const std::vector<sim::SlotRecord>& records, LogFormat format);

nlohmann::json summary_to_json(const sim::ScenarioConfig& config, const sim::SummaryStats& stats);
sim::SummaryStats summary_from_json(const nlohmann::json& doc);

nlohmann::json aggregates_to_json(const std::vector<ScenarioAggregate>& aggregates);

/// Text tables, one per group of consecutive scenarios with the same SU count:
/// a row per scenario with loss rate (%), average tax and average cost per SU.
std::string report_tables(const std::vector<ScenarioAggregate>& aggregates);

/// Checks the request, makes sure the output directory is writable, then
/// runs every (scenario, seed) pair. Throws ConfigError or IoError before
/// any simulation starts; failures during the runs land in `errors`.
ExecuteResult execute(const RunRequest& request);

}  // namespace cogbid::runner
