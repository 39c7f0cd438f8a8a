// cogbid: run spectrum-auction scenarios and write logs, summaries and tables.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogbid/config.hpp"
#include "cogbid/errors.hpp"
#include "cogbid/runner.hpp"
#include "cogbid/scenarios.hpp"

namespace {

constexpr const char* kOutEnv = "COGBID_OUT_DIR";

void list_scenarios() {
  for (const auto& c : cogbid::sim::builtin_scenarios()) {
    std::string policies;
    for (const auto& su : c.sus) {
      if (!policies.empty()) policies += '/';
      policies += cogbid::strategies::policy_name(su.policy);
    }
    std::cout << c.name << "  channels=" << c.channels.size() << " sus=" << c.sus.size()
              << " p_nf=" << c.channels.front().p_nf << " p_fn=" << c.channels.front().p_fn << "  " << policies
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated spectrum auctions between secondary users: batch runner"};
  app.set_version_flag("--version", "cogbid 1.0.0");

  bool list = false;
  std::vector<std::string> scenario_names;
  std::vector<std::string> config_paths;
  std::string show;
  std::vector<std::uint64_t> seeds;
  int seed_count = 0;
  std::optional<int> horizon;
  std::optional<int> window;
  const char* env_out = std::getenv(kOutEnv);
  std::string out_dir = env_out && *env_out ? env_out : "cogbid-out";
  std::string format = "csv";
  int threads = 1;
  bool quiet = false;

  app.add_flag("--list", list, "List the built-in scenarios and exit");
  app.add_option("-s,--scenario", scenario_names,
                 "Built-in scenario name or prefix (e.g. two_su, scarcity_s3); repeatable");
  app.add_option("-c,--config", config_paths, "Scenario file (JSON); repeatable")->check(CLI::ExistingFile);
  app.add_option("--show", show, "Print a built-in scenario as a JSON config and exit");
  auto* seed_opt = app.add_option("--seed", seeds, "Seed(s) to run; repeatable");
  app.add_option("-n,--seed-count", seed_count, "Run seeds 1..N")->check(CLI::PositiveNumber)->excludes(seed_opt);
  app.add_option("--horizon", horizon, "Override the number of slots")->check(CLI::PositiveNumber);
  app.add_option("--window", window, "Override the summary window")->check(CLI::PositiveNumber);
  app.add_option("-o,--out", out_dir, std::string("Output directory (default: $") + kOutEnv + " or cogbid-out)");
  app.add_option("--format", format, "Per-slot log format")->check(CLI::IsMember({"csv", "tsv", "none"}));
  app.add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "Do not print the summary tables");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    list_scenarios();
    return 0;
  }

  try {
    if (!show.empty()) {
      const auto picked = cogbid::sim::select_scenarios(show);
      if (picked.size() != 1) throw cogbid::ConfigError("--show needs exactly one scenario name");
      std::cout << cogbid::config::to_json(picked.front()).dump(2) << '\n';
      return 0;
    }

    cogbid::runner::RunRequest req;
    for (const auto& name : scenario_names) {
      for (auto& c : cogbid::sim::select_scenarios(name)) req.scenarios.push_back(std::move(c));
    }
    for (const auto& path : config_paths) req.scenarios.push_back(cogbid::config::load_config(path));
    if (req.scenarios.empty()) {
      std::cerr << "error: nothing to run; give --scenario or --config (see --list)\n";
      return 2;
    }
    if (seed_count > 0) {
      for (int s = 1; s <= seed_count; ++s) req.seeds.push_back(static_cast<std::uint64_t>(s));
    } else if (!seeds.empty()) {
      req.seeds = seeds;
    } else {
      // Each scenario's own seed; only well defined when they agree.
      req.seeds.push_back(req.scenarios.front().seed);
    }
    req.horizon = horizon;
    req.window = window;
    req.out_dir = out_dir;
    req.format = format == "tsv" ? cogbid::runner::LogFormat::tsv
                 : format == "none" ? cogbid::runner::LogFormat::none
                                    : cogbid::runner::LogFormat::csv;
    req.threads = threads;

    const auto result = cogbid::runner::execute(req);
    for (const auto& e : result.errors) std::cerr << "error: " << e << '\n';
    if (!quiet) std::cout << cogbid::runner::report_tables(result.aggregates);
    return result.exit_code;
  } catch (const cogbid::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
