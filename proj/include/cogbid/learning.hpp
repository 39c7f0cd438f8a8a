#pragma once

// Best-response learner for one SU. Opponents are summarized by a congestion
// class inferred from the SU's own tax (or its own losing bids), opponent
// class transitions are estimated from counts, and a value table over
// (own state, class) is updated from realized rewards plus a model-based
// expectation of the next value.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogbid/env.hpp"
#include "cogbid/rng.hpp"

namespace cogbid::learning {

/// Maps a tax magnitude (or a bid) onto one of H equally wide classes of [0, Γ].
class OpponentClassifier {
 public:
  OpponentClassifier(double gamma_max, int classes);

  double gamma_max() const noexcept { return gamma_max_; }
  int classes() const noexcept { return classes_; }
  int last_class() const noexcept { return last_class_; }
  void set_last_class(int h);

  /// Γ_0 .. Γ_H.
  std::vector<double> thresholds() const;

  /// Class of a magnitude in [1, H]; anything at or above Γ lands in H.
  int class_of(double magnitude) const;

  /// Classifies the slot's outcome and remembers the result.
  int classify(int assigned_channel, double tax, std::span<const double> own_bids,
               const std::vector<bool>& availability);

 private:
  double gamma_max_;
  int classes_;
  int last_class_ = 1;
};

/// f(h', h'', j): observed class transitions h'' -> h' under allocation j,
/// where j = 0 means "no channel" and j >= 1 is channel j-1.
class TransitionCounts {
 public:
  TransitionCounts(int classes, int channels);

  int classes() const noexcept { return classes_; }
  int channels() const noexcept { return channels_; }

  std::uint64_t at(int h_next, int h_prev, int alloc) const { return data_[offset(h_next, h_prev, alloc)]; }
  void increment(int h_next, int h_prev, int alloc) { ++data_[offset(h_next, h_prev, alloc)]; }
  std::uint64_t total() const;

  const std::vector<std::uint64_t>& raw() const noexcept { return data_; }
  std::vector<std::uint64_t>& raw() noexcept { return data_; }
  bool operator==(const TransitionCounts&) const = default;

 private:
  std::size_t offset(int h_next, int h_prev, int alloc) const;

  int classes_;
  int channels_;
  std::vector<std::uint64_t> data_;
};

/// V(s, h) with per-entry visit counts, all zero at start.
class ValueTable {
 public:
  ValueTable(env::StateSpace space, int classes);

  const env::StateSpace& space() const noexcept { return space_; }
  int classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return values_.size(); }

  double value(std::size_t state_index, int h) const { return values_[key(state_index, h)]; }
  double& value(std::size_t state_index, int h) { return values_[key(state_index, h)]; }
  std::uint64_t visits(std::size_t state_index, int h) const { return visits_[key(state_index, h)]; }
  std::uint64_t& visits(std::size_t state_index, int h) { return visits_[key(state_index, h)]; }

  const std::vector<double>& raw_values() const noexcept { return values_; }
  std::vector<double>& raw_values() noexcept { return values_; }
  const std::vector<std::uint64_t>& raw_visits() const noexcept { return visits_; }
  std::vector<std::uint64_t>& raw_visits() noexcept { return visits_; }
  bool operator==(const ValueTable& o) const {
    return values_ == o.values_ && visits_ == o.visits_ && classes_ == o.classes_;
  }

 private:
  std::size_t key(std::size_t state_index, int h) const;

  env::StateSpace space_;
  int classes_;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

/// Step size as a function of how often the entry has been visited.
using LearningRateSchedule = std::function<double(std::uint64_t)>;

/// 1 / (2 + m): in (0, 1), divergent sum, convergent sum of squares.
double learning_rate(std::uint64_t visits);

void update_transition_counts(TransitionCounts& counts, int h_prev, int h_new, int assigned_channel);

/// q(h' | h, j) by relative frequency; uniform when the column is still empty.
std::vector<double> estimate_opponent_transition(const TransitionCounts& counts, int h_cur,
                                                 int assigned_channel);

/// Σ_{s',h'} q(s'|s,z) q(h'|h,z) V(s',h').
double expected_future_value(const env::SUState& s, int h, int assigned_channel,
                             const ValueTable& table, const env::SuEnvironment& model,
                             const TransitionCounts& counts);

double compute_stage_q(const env::SUState& s, int h, double realized_reward, int assigned_channel,
                       const ValueTable& table, const env::SuEnvironment& model,
                       const TransitionCounts& counts, double discount);

void update_value_table(ValueTable& table, std::size_t state_index, int h, double q,
                        const LearningRateSchedule& schedule = learning_rate);

/// Preference bid per channel; zero on unavailable channels and clamped at zero.
std::vector<double> compute_preference_bids(const env::SUState& s, int h, const ValueTable& table,
                                            const env::SuEnvironment& model,
                                            const TransitionCounts& counts, double discount);

struct LearnerConfig {
  double discount = 0.8;
  int classes = 5;
  double gamma_max = 1.0;
  double epsilon = 0.0;        ///< probability of a random exploratory bid vector
  bool freeze_values = false;  ///< keep V at its initial zeros
};

/// Runs the per-slot learning procedure for one SU: bid from the current
/// tables, then classify, count, compute Q and update V once the slot's
/// outcome and reward are known.
class Learner {
 public:
  Learner(env::SuEnvironment model, LearnerConfig config, std::uint64_t seed = 0);

  std::vector<double> bids(const env::SUState& s);

  void observe(const env::SUState& s, std::span<const double> own_bids,
               const std::vector<bool>& availability, int assigned_channel, double tax,
               double realized_reward);

  const LearnerConfig& config() const noexcept { return config_; }
  const env::SuEnvironment& model() const noexcept { return model_; }
  const ValueTable& values() const noexcept { return values_; }
  const TransitionCounts& counts() const noexcept { return counts_; }
  const OpponentClassifier& classifier() const noexcept { return classifier_; }

  /// Versioned structured snapshot of the learner's mutable state.
  nlohmann::json snapshot() const;
  /// Rebuilds a learner from a snapshot; `model` must match the snapshot's dimensions.
  static Learner restore(env::SuEnvironment model, const nlohmann::json& snapshot);

  static constexpr int kSnapshotVersion = 1;

 private:
  env::SuEnvironment model_;
  LearnerConfig config_;
  OpponentClassifier classifier_;
  TransitionCounts counts_;
  ValueTable values_;
  Rng rng_;
  std::optional<int> prev_class_;
  int prev_alloc_ = 0;
};

}  // namespace cogbid::learning
