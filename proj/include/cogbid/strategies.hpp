#pragma once

// The four bidding policies: fixed, source-aware, myopic and learning-based.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cogbid/env.hpp"

namespace cogbid::learning {
class Learner;
}

namespace cogbid::strategies {

/// Same bid vector every slot.
struct FixedPolicy {
  std::vector<double> bids;
  bool operator==(const FixedPolicy&) const = default;
};

/// Buffer-driven bid, identical on every available channel.
struct SourceAwarePolicy {
  bool operator==(const SourceAwarePolicy&) const = default;
};

/// Expected immediate loss avoided on each channel.
struct MyopicPolicy {
  bool operator==(const MyopicPolicy&) const = default;
};

/// Best-response learner. The discount lives with the SU configuration.
struct LearningPolicy {
  int classes = 5;
  std::optional<double> gamma_max;  ///< unset: calibrated from the SU's model
  double epsilon = 0.0;
  bool freeze_values = false;
  bool operator==(const LearningPolicy&) const = default;
};

using Policy = std::variant<FixedPolicy, SourceAwarePolicy, MyopicPolicy, LearningPolicy>;

std::string policy_name(const Policy& policy);

/// Outcome of the previous slot as seen by the SU itself.
struct LastOutcome {
  std::vector<double> bids;
  int assigned_channel = env::kNoChannel;
  double tax = 0.0;
};

struct Observation {
  env::SUState state;
  std::vector<bool> availability;
  LastOutcome last;
};

/// Reference level used by the source-aware policy: the middle SNR level.
int middle_level(int levels);

std::vector<double> fixed_bid(const FixedPolicy& policy);

std::vector<double> source_aware_bid(env::BufferState v, const std::vector<bool>& availability,
                                     const env::SuEnvironment& model);

std::vector<double> myopic_bid(const env::SUState& s, const env::SuEnvironment& model);

/// Default constant for the fixed policy: the myopic bid of a half-full
/// buffer on a channel at the middle level, on every channel.
std::vector<double> default_fixed_bids(const env::SuEnvironment& model);

/// Largest bid the myopic policy can ever place (full buffer, best channel
/// versus no channel). Used to calibrate the learner's tax range.
double max_myopic_bid(const env::SuEnvironment& model);

/// Dispatch to the policy's bid computation. The result has one entry per
/// channel, is nonnegative and is zero on unavailable channels.
std::vector<double> act(const Policy& policy, const Observation& obs, const env::SuEnvironment& model,
                        learning::Learner* learner);

}  // namespace cogbid::strategies
