#include "cogbid/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <cctype>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "cogbid/errors.hpp"
#include "cogbid/strategies.hpp"

namespace cogbid::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSummaryVersion = 1;
constexpr int kAggregateVersion = 1;

template <class T>
std::string joined(const std::vector<T>& xs, char sep) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += sep;
    out += fmt::format("{}", xs[k]);
  }
  return out;
}

bool safe_name(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

void probe_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto probe = dir / ".cogbid-write-test";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush()) {
      throw IoError("output directory '" + dir.string() + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

std::string extension(LogFormat f) { return f == LogFormat::tsv ? ".tsv" : ".csv"; }

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  const double n = static_cast<double>(xs.size());
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

ScenarioAggregate aggregate(const sim::ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                            std::span<const sim::SummaryStats> summaries) {
  if (seeds.size() != summaries.size()) throw DimensionError("aggregate: one summary per seed");
  ScenarioAggregate a;
  a.scenario = config.name;
  a.seeds.assign(seeds.begin(), seeds.end());
  for (std::size_t i = 0; i < config.sus.size(); ++i) {
    std::vector<double> loss, tax, cost;
    for (const auto& s : summaries) {
      loss.push_back(s.sus.at(i).loss_rate_pct);
      tax.push_back(s.sus.at(i).avg_tax);
      cost.push_back(s.sus.at(i).avg_cost);
    }
    a.sus.push_back({strategies::policy_name(config.sus[i].policy), mean_std(loss), mean_std(tax), mean_std(cost)});
  }
  return a;
}

void write_log(std::ostream& out, const std::vector<sim::SlotRecord>& records, LogFormat format) {
  const char sep = format == LogFormat::tsv ? '\t' : ',';
  const std::vector<std::string> header{"slot", "su",   "available", "buffer",  "arrivals", "served",
                                        "lost", "tax",  "cost",      "channel", "levels",   "bids"};
  out << joined(header, sep) << '\n';
  std::string line;
  for (const auto& rec : records) {
    std::string avail;
    for (bool b : rec.availability) avail += b ? '1' : '0';
    for (std::size_t i = 0; i < rec.sus.size(); ++i) {
      const auto& r = rec.sus[i];
      line = fmt::format("{1}{0}{2}{0}{3}{0}{4}{0}{5}{0}{6}{0}{7}{0}{8}{0}{9}{0}{10}{0}{11}{0}{12}\n", sep, rec.slot,
                         i + 1, avail, r.buffer, r.arrivals, r.served, r.lost, r.tax, r.cost, r.channel + 1,
                         joined(r.levels, ';'), joined(r.bids, ';'));
      out << line;
    }
  }
}

json summary_to_json(const sim::ScenarioConfig& config, const sim::SummaryStats& stats) {
  json doc;
  doc["format"] = "cogbid-summary";
  doc["version"] = kSummaryVersion;
  doc["scenario"] = config.name;
  doc["seed"] = config.seed;
  doc["horizon"] = config.horizon;
  doc["window"] = stats.window;
  doc["sus"] = json::array();
  for (std::size_t i = 0; i < stats.sus.size(); ++i) {
    const auto& s = stats.sus[i];
    json su;
    su["su"] = i + 1;
    if (i < config.sus.size()) su["policy"] = strategies::policy_name(config.sus[i].policy);
    su["loss_rate_pct"] = s.loss_rate_pct;
    su["avg_tax"] = s.avg_tax;
    su["avg_loss"] = s.avg_loss;
    su["avg_cost"] = s.avg_cost;
    su["avg_reward"] = s.avg_reward;
    su["total_arrived"] = s.total_arrived;
    su["total_lost"] = s.total_lost;
    doc["sus"].push_back(std::move(su));
  }
  return doc;
}

sim::SummaryStats summary_from_json(const json& doc) {
  try {
    if (doc.at("format") != "cogbid-summary") throw ConfigError("summary: not a cogbid summary");
    if (doc.at("version").get<int>() != kSummaryVersion) throw ConfigError("summary: unsupported version");
    sim::SummaryStats stats;
    stats.window = doc.at("window").get<int>();
    for (const auto& su : doc.at("sus")) {
      sim::SuSummary s;
      s.loss_rate_pct = su.at("loss_rate_pct").get<double>();
      s.avg_tax = su.at("avg_tax").get<double>();
      s.avg_loss = su.at("avg_loss").get<double>();
      s.avg_cost = su.at("avg_cost").get<double>();
      s.avg_reward = su.at("avg_reward").get<double>();
      s.total_arrived = su.at("total_arrived").get<std::int64_t>();
      s.total_lost = su.at("total_lost").get<std::int64_t>();
      stats.sus.push_back(s);
    }
    return stats;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
}

json aggregates_to_json(const std::vector<ScenarioAggregate>& aggregates) {
  json doc;
  doc["format"] = "cogbid-aggregate";
  doc["version"] = kAggregateVersion;
  doc["scenarios"] = json::array();
  for (const auto& a : aggregates) {
    json s;
    s["scenario"] = a.scenario;
    s["seeds"] = a.seeds;
    s["sus"] = json::array();
    for (std::size_t i = 0; i < a.sus.size(); ++i) {
      const auto& su = a.sus[i];
      s["sus"].push_back({{"su", i + 1},
                          {"policy", su.policy},
                          {"loss_rate_pct", mean_std_json(su.loss_rate_pct)},
                          {"avg_tax", mean_std_json(su.avg_tax)},
                          {"avg_cost", mean_std_json(su.avg_cost)}});
    }
    doc["scenarios"].push_back(std::move(s));
  }
  return doc;
}

std::string report_tables(const std::vector<ScenarioAggregate>& aggregates) {
  std::string out;
  std::size_t begin = 0;
  while (begin < aggregates.size()) {
    const std::size_t m = aggregates[begin].sus.size();
    std::size_t end = begin;
    while (end < aggregates.size() && aggregates[end].sus.size() == m) ++end;

    std::size_t name_w = 8, pol_w = 8;
    for (std::size_t k = begin; k < end; ++k) {
      name_w = std::max(name_w, aggregates[k].scenario.size());
      std::vector<std::string> names;
      for (const auto& su : aggregates[k].sus) names.push_back(su.policy);
      pol_w = std::max(pol_w, joined(names, '/').size());
    }

    const bool spread = std::any_of(aggregates.begin() + begin, aggregates.begin() + end,
                                    [](const auto& a) { return a.seeds.size() > 1; });
    for (const bool std_table : {false, true}) {
      if (std_table && !spread) break;
      if (!out.empty()) out += '\n';
      if (std_table) out += "Standard deviation across seeds\n";
      std::string head = fmt::format("{:<{}}  {:<{}}", "scenario", name_w, "policies", pol_w);
      for (std::size_t i = 0; i < m; ++i) {
        head += fmt::format(" | {:>8} {:>8} {:>8}", fmt::format("loss%{}", i + 1), fmt::format("tax{}", i + 1),
                            fmt::format("cost{}", i + 1));
      }
      out += head + '\n' + std::string(head.size(), '-') + '\n';
      for (std::size_t k = begin; k < end; ++k) {
        const auto& a = aggregates[k];
        std::vector<std::string> names;
        for (const auto& su : a.sus) names.push_back(su.policy);
        std::string row = fmt::format("{:<{}}  {:<{}}", a.scenario, name_w, joined(names, '/'), pol_w);
        for (const auto& su : a.sus) {
          const auto pick = [&](const MeanStd& x) { return std_table ? x.std : x.mean; };
          row += fmt::format(" | {:>8.2f} {:>8.4f} {:>8.4f}", pick(su.loss_rate_pct), pick(su.avg_tax),
                             pick(su.avg_cost));
        }
        out += row + '\n';
      }
    }
    begin = end;
  }
  return out;
}

ExecuteResult execute(const RunRequest& request) {
  std::vector<std::string> problems;
  if (request.seeds.empty()) problems.emplace_back("seeds: need at least one seed");
  if (request.scenarios.empty()) problems.emplace_back("scenarios: nothing to run");
  if (request.threads < 1) problems.emplace_back("threads: must be >= 1");
  if (request.out_dir.empty()) problems.emplace_back("out: output directory is required");

  std::vector<sim::ScenarioConfig> scenarios = request.scenarios;
  std::set<std::string> names;
  for (auto& c : scenarios) {
    if (request.horizon) c.horizon = *request.horizon;
    if (request.window) c.window = *request.window;
    if (!safe_name(c.name)) problems.push_back("scenario '" + c.name + "': name must use only letters, digits, '_', '-' and '.'");
    if (!names.insert(c.name).second) problems.push_back("scenario '" + c.name + "': listed twice");
    for (const auto& v : c.violations()) problems.push_back(c.name + ": " + v);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  probe_writable(request.out_dir);
  for (const auto& c : scenarios) probe_writable(request.out_dir / c.name);

  const std::size_t n_seeds = request.seeds.size();
  const std::size_t jobs = scenarios.size() * n_seeds;
  std::vector<sim::SummaryStats> summaries(jobs);
  std::vector<std::string> job_errors(jobs);
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      auto config = scenarios[job / n_seeds];
      config.seed = request.seeds[job % n_seeds];
      try {
        const auto result = sim::run_scenario(config);
        const auto stem = request.out_dir / config.name / ("seed_" + std::to_string(config.seed));
        if (request.format != LogFormat::none) {
          std::ofstream log(fs::path(stem.string() + extension(request.format)), std::ios::binary);
          write_log(log, result.records, request.format);
          if (!log.flush()) throw IoError("failed writing log for '" + stem.string() + "'");
        }
        write_file(stem.string() + ".summary.json", summary_to_json(config, result.summary).dump(2) + "\n");
        summaries[job] = result.summary;
      } catch (const std::exception& e) {
        job_errors[job] = config.name + " seed " + std::to_string(config.seed) + ": " + e.what();
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(request.threads), jobs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  ExecuteResult result;
  for (const auto& e : job_errors) {
    if (!e.empty()) result.errors.push_back(e);
  }
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    bool complete = true;
    for (std::size_t k = 0; k < n_seeds; ++k) complete = complete && job_errors[s * n_seeds + k].empty();
    if (!complete) continue;
    const std::span<const sim::SummaryStats> per_seed(summaries.data() + s * n_seeds, n_seeds);
    result.aggregates.push_back(aggregate(scenarios[s], request.seeds, per_seed));
  }

  try {
    write_file(request.out_dir / "aggregate.json", aggregates_to_json(result.aggregates).dump(2) + "\n");
    write_file(request.out_dir / "report.txt", report_tables(result.aggregates));
  } catch (const std::exception& e) {
    result.errors.emplace_back(e.what());
  }
  result.exit_code = result.errors.empty() ? 0 : 1;
  return result;
}

}  // namespace cogbid::runner
