#include "cogbid/scenarios.hpp"

#include "cogbid/errors.hpp"

namespace cogbid::sim {

namespace {

using strategies::FixedPolicy;
using strategies::LearningPolicy;
using strategies::MyopicPolicy;
using strategies::Policy;
using strategies::SourceAwarePolicy;

ScenarioConfig make(std::string name, double p_nf, double p_fn, int channels,
                    std::vector<Policy> policies) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.slot_len = Defaults::kSlotLen;
  c.channels.assign(static_cast<std::size_t>(channels), default_channel(p_nf, p_fn));
  for (auto& p : policies) c.sus.push_back(default_su(std::move(p)));
  c.horizon = Defaults::kHorizon;
  c.window = Defaults::kWindow;
  c.seed = 1;
  resolve_defaults(c);
  return c;
}

std::vector<ScenarioConfig> build_catalog() {
  std::vector<ScenarioConfig> out;
  // Two SUs on two channels.
  out.push_back(make("two_su_s1", 0.5, 0.5, 2, {FixedPolicy{}, FixedPolicy{}}));
  out.push_back(make("two_su_s2", 0.5, 0.5, 2, {FixedPolicy{}, MyopicPolicy{}}));
  out.push_back(make("two_su_s3", 0.5, 0.5, 2, {SourceAwarePolicy{}, MyopicPolicy{}}));
  out.push_back(make("two_su_s4", 0.5, 0.5, 2, {MyopicPolicy{}, MyopicPolicy{}}));
  out.push_back(make("two_su_s5", 0.5, 0.5, 2, {LearningPolicy{}, MyopicPolicy{}}));

  // Five SUs on three channels; SU 5 learns in the second scenario.
  out.push_back(make("five_su_s1", 0.7, 0.3, 3,
                     {MyopicPolicy{}, MyopicPolicy{}, MyopicPolicy{}, MyopicPolicy{}, MyopicPolicy{}}));
  out.push_back(make("five_su_s2", 0.7, 0.3, 3,
                     {MyopicPolicy{}, MyopicPolicy{}, MyopicPolicy{}, MyopicPolicy{}, LearningPolicy{}}));

  // Channel scarcity sweep.
  const std::pair<double, double> avail[] = {{0.8, 0.2}, {0.5, 0.5}, {0.4, 0.6}};
  for (int k = 0; k < 3; ++k) {
    const auto [p_nf, p_fn] = avail[k];
    const std::string base = "scarcity_s" + std::to_string(k + 1);
    out.push_back(make(base + "_myopic", p_nf, p_fn, 2, {MyopicPolicy{}, MyopicPolicy{}}));
    out.push_back(make(base + "_learning", p_nf, p_fn, 2, {LearningPolicy{}, MyopicPolicy{}}));
  }
  return out;
}

}  // namespace

double packets_per_second(double bits_per_second, int packet_bytes) {
  return bits_per_second / (8.0 * packet_bytes);
}

env::ChannelModel default_channel(double p_nf, double p_fn) {
  env::ChannelModel m;
  m.p_nf = p_nf;
  m.p_fn = p_fn;
  m.snr_db = Defaults::kSnrDb;
  m.entry_dist = Defaults::kEntry;
  m.cond_trans.assign(Defaults::kSnrDb.size(), Defaults::kEntry);
  return m;
}

SuConfig default_su(strategies::Policy policy, double slot_len) {
  SuConfig s;
  s.traffic = env::TrafficModel::make(
      packets_per_second(Defaults::kArrivalBitsPerSecond, Defaults::kPacketBytes), slot_len);
  s.buffer_capacity = Defaults::kBufferCapacity;
  s.rates = env::RateTable::from_packets_per_slot(Defaults::kPacketsPerSlot, slot_len);
  s.policy = std::move(policy);
  s.discount = Defaults::kDiscount;
  return s;
}

const std::vector<ScenarioConfig>& builtin_scenarios() {
  static const std::vector<ScenarioConfig> catalog = build_catalog();
  return catalog;
}

std::vector<ScenarioConfig> select_scenarios(std::string_view selector) {
  std::vector<ScenarioConfig> out;
  for (const auto& c : builtin_scenarios()) {
    if (c.name == selector) return {c};
  }
  for (const auto& c : builtin_scenarios()) {
    if (!selector.empty() && c.name.starts_with(selector)) out.push_back(c);
  }
  if (out.empty()) throw ConfigError("unknown scenario '" + std::string(selector) + "'");
  return out;
}

}  // namespace cogbid::sim
