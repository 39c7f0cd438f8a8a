#include "cogbid/strategies.hpp"

#include <algorithm>

#include "cogbid/errors.hpp"
#include "cogbid/learning.hpp"

namespace cogbid::strategies {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string policy_name(const Policy& policy) {
  return std::visit(overloaded{
                        [](const FixedPolicy&) { return std::string("fixed"); },
                        [](const SourceAwarePolicy&) { return std::string("source_aware"); },
                        [](const MyopicPolicy&) { return std::string("myopic"); },
                        [](const LearningPolicy&) { return std::string("learning"); },
                    },
                    policy);
}

int middle_level(int levels) { return std::max(1, (levels + 1) / 2); }

std::vector<double> fixed_bid(const FixedPolicy& policy) { return policy.bids; }

std::vector<double> source_aware_bid(env::BufferState v, const std::vector<bool>& availability,
                                     const env::SuEnvironment& model) {
  const double beta =
      env::service_benefit(v, middle_level(model.levels()), model.rates, model.traffic);
  std::vector<double> bids(availability.size(), 0.0);
  for (std::size_t j = 0; j < availability.size(); ++j) {
    if (availability[j]) bids[j] = std::max(beta, 0.0);
  }
  return bids;
}

std::vector<double> myopic_bid(const env::SUState& s, const env::SuEnvironment& model) {
  std::vector<double> bids(s.channels.size(), 0.0);
  for (std::size_t j = 0; j < s.channels.size(); ++j) {
    const int level = s.channels[j].level;
    if (level == 0) continue;
    bids[j] = std::max(env::service_benefit(s.buffer, level, model.rates, model.traffic), 0.0);
  }
  return bids;
}

std::vector<double> default_fixed_bids(const env::SuEnvironment& model) {
  const env::BufferState half{model.capacity / 2, model.capacity};
  const double b = env::service_benefit(half, middle_level(model.levels()), model.rates, model.traffic);
  return std::vector<double>(static_cast<std::size_t>(model.num_channels()), std::max(b, 0.0));
}

double max_myopic_bid(const env::SuEnvironment& model) {
  const env::BufferState full{model.capacity, model.capacity};
  return std::max(env::service_benefit(full, model.levels(), model.rates, model.traffic), 0.0);
}

std::vector<double> act(const Policy& policy, const Observation& obs, const env::SuEnvironment& model,
                        learning::Learner* learner) {
  std::vector<double> bids = std::visit(
      overloaded{
          [&](const FixedPolicy& p) { return fixed_bid(p); },
          [&](const SourceAwarePolicy&) { return source_aware_bid(obs.state.buffer, obs.availability, model); },
          [&](const MyopicPolicy&) { return myopic_bid(obs.state, model); },
          [&](const LearningPolicy&) {
            if (learner == nullptr) throw ConfigError("learning policy has no learner attached");
            return learner->bids(obs.state);
          },
      },
      policy);
  if (bids.size() != obs.availability.size()) {
    throw DimensionError("policy produced a bid vector of the wrong length");
  }
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (!obs.availability[j] || bids[j] < 0.0) bids[j] = 0.0;
  }
  return bids;
}

}  // namespace cogbid::strategies
