#pragma once

// Repeated-auction game loop: channel evolution, bidding, auction, service,
// arrivals, losses and learner updates, one slot at a time.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cogbid/env.hpp"
#include "cogbid/learning.hpp"
#include "cogbid/rng.hpp"
#include "cogbid/strategies.hpp"

namespace cogbid::sim {

struct SuConfig {
  env::TrafficModel traffic;
  int buffer_capacity = 10;
  env::RateTable rates;
  strategies::Policy policy = strategies::MyopicPolicy{};
  double discount = 0.8;

  bool operator==(const SuConfig&) const = default;
};

struct ScenarioConfig {
  std::string name;
  double slot_len = 0.01;
  std::vector<env::ChannelModel> channels;
  std::vector<SuConfig> sus;
  int horizon = 20000;
  int window = 1000;
  std::uint64_t seed = 1;

  /// Throws ConfigError listing every violated invariant.
  void validate() const;
  /// Every violated invariant, empty when valid.
  std::vector<std::string> violations() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Kernels an SU uses about itself, built from the scenario.
env::SuEnvironment su_environment(const ScenarioConfig& config, std::size_t su);

/// Fills policy defaults that depend on the SU's model: the fixed policy's
/// constant bid vector and the learner's tax range.
void resolve_defaults(ScenarioConfig& config);

struct SuSlotRecord {
  int buffer = 0;    ///< occupancy at the start of the slot
  int arrivals = 0;
  int served = 0;
  int lost = 0;
  double tax = 0.0;  ///< <= 0
  double cost = 0.0; ///< lost - tax
  int channel = env::kNoChannel;
  std::vector<double> bids;
  std::vector<int> levels;  ///< the SU's channel levels this slot

  bool operator==(const SuSlotRecord&) const = default;
};

struct SlotRecord {
  int slot = 0;
  std::vector<bool> availability;
  std::vector<SuSlotRecord> sus;

  bool operator==(const SlotRecord&) const = default;
};

struct SuSummary {
  double loss_rate_pct = 0.0;
  double avg_tax = 0.0;   ///< mean |tax| per slot
  double avg_loss = 0.0;  ///< mean lost packets per slot
  double avg_cost = 0.0;  ///< mean (lost - tax) per slot
  double avg_reward = 0.0;
  std::int64_t total_arrived = 0;
  std::int64_t total_lost = 0;

  bool operator==(const SuSummary&) const = default;
};

struct SummaryStats {
  int window = 0;
  std::vector<SuSummary> sus;

  bool operator==(const SummaryStats&) const = default;
};

/// Mutable state of one simulation run.
class World {
 public:
  explicit World(ScenarioConfig config);

  const ScenarioConfig& config() const noexcept { return config_; }
  int slot() const noexcept { return slot_; }
  std::size_t num_sus() const noexcept { return sus_.size(); }
  const std::vector<bool>& availability() const noexcept { return available_; }
  env::SUState su_state(std::size_t su) const;
  const env::SuEnvironment& su_model(std::size_t su) const { return sus_[su].model; }
  /// Null unless the SU uses the learning policy.
  learning::Learner* learner(std::size_t su) { return sus_[su].learner.get(); }
  const learning::Learner* learner(std::size_t su) const { return sus_[su].learner.get(); }

  SlotRecord step();

 private:
  struct Agent {
    env::SuEnvironment model;
    int occupancy = 0;
    std::vector<int> levels;
    std::unique_ptr<learning::Learner> learner;
    strategies::LastOutcome last;
    Rng traffic_rng;
  };

  void advance_channels();

  ScenarioConfig config_;
  std::vector<Agent> sus_;
  std::vector<bool> available_;
  std::vector<Rng> channel_rng_;
  Rng tie_rng_;
  int slot_ = 0;
};

SlotRecord run_slot(World& world);

struct RunResult {
  std::vector<SlotRecord> records;
  SummaryStats summary;
};

/// Runs `config.horizon` slots and summarizes the trailing window.
RunResult run_scenario(const ScenarioConfig& config);

/// Averages over the last `window` records.
SummaryStats summarize(std::span<const SlotRecord> records, int window);

}  // namespace cogbid::sim
