#include "cogbid/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cogbid/auction.hpp"
#include "cogbid/errors.hpp"

namespace cogbid::sim {

namespace {

constexpr std::uint64_t kTieStream = 1;
constexpr std::uint64_t kChannelStreamBase = 100;
constexpr std::uint64_t kTrafficStreamBase = 1000;
constexpr std::uint64_t kLearnerStreamBase = 2000;

std::string su_prefix(std::size_t i) { return "sus[" + std::to_string(i) + "]: "; }

void check_outcome(const auction::BidMatrix& bids, const auction::AuctionOutcome& out) {
  std::vector<int> holders(bids.num_channels(), 0);
  for (std::size_t i = 0; i < bids.num_sus(); ++i) {
    const int ch = out.allocation.channel_of[i];
    const double tax = out.taxes[i];
    if (tax > 0.0) throw std::logic_error("auction produced a positive tax");
    if (ch == auction::kUnassigned) {
      if (tax != 0.0) throw std::logic_error("unallocated SU charged a tax");
      continue;
    }
    const auto c = static_cast<std::size_t>(ch);
    if (!bids.available(c)) throw std::logic_error("unavailable channel allocated");
    if (++holders[c] > 1) throw std::logic_error("channel allocated twice");
    if (-tax > auction::effective_bid(bids, i, c)) throw std::logic_error("tax exceeds the winning bid");
  }
}

}  // namespace

std::vector<std::string> ScenarioConfig::violations() const {
  std::vector<std::string> v;
  if (!(slot_len > 0.0)) v.emplace_back("slot_len: must be > 0");
  if (channels.empty()) v.emplace_back("channels: need at least one channel");
  if (sus.empty()) v.emplace_back("sus: need at least one SU");
  if (window < 1) v.emplace_back("window: must be >= 1");
  if (horizon < window) v.emplace_back("horizon: must be >= window");

  int levels = -1;
  for (std::size_t j = 0; j < channels.size(); ++j) {
    try {
      channels[j].validate();
    } catch (const ModelError& e) {
      v.push_back("channels[" + std::to_string(j) + "]: " + e.what());
    }
    if (levels < 0) {
      levels = channels[j].levels();
    } else if (channels[j].levels() != levels) {
      v.push_back("channels[" + std::to_string(j) + "]: every channel needs the same number of SNR levels");
    }
  }

  for (std::size_t i = 0; i < sus.size(); ++i) {
    const auto& su = sus[i];
    const auto p = su_prefix(i);
    try {
      su.traffic.validate();
    } catch (const ModelError& e) {
      v.push_back(p + "traffic: " + e.what());
    }
    if (su.traffic.slot_len != slot_len) v.push_back(p + "traffic slot length differs from the scenario's");
    if (su.buffer_capacity < 1) v.push_back(p + "buffer: capacity must be >= 1");
    try {
      su.rates.validate();
    } catch (const ModelError& e) {
      v.push_back(p + "rates: " + e.what());
    }
    if (levels >= 0 && su.rates.levels() != levels) {
      v.push_back(p + "rates: need one rate per SNR level (" + std::to_string(levels) + ")");
    }
    if (!(su.discount >= 0.0 && su.discount < 1.0)) v.push_back(p + "discount must be in [0,1)");
    if (const auto* f = std::get_if<strategies::FixedPolicy>(&su.policy)) {
      if (!f->bids.empty() && f->bids.size() != channels.size()) {
        v.push_back(p + "fixed bids: need one bid per channel");
      }
      for (double b : f->bids) {
        if (!(b >= 0.0) || !std::isfinite(b)) {
          v.push_back(p + "fixed bids: must be finite and >= 0");
          break;
        }
      }
    }
    if (const auto* l = std::get_if<strategies::LearningPolicy>(&su.policy)) {
      if (l->classes < 1) v.push_back(p + "classes: must be >= 1");
      if (l->gamma_max && !(*l->gamma_max >= 0.0 && std::isfinite(*l->gamma_max))) {
        v.push_back(p + "gamma_max: must be finite and >= 0");
      }
      if (!(l->epsilon >= 0.0 && l->epsilon <= 1.0)) v.push_back(p + "epsilon: must be in [0,1]");
    }
  }
  return v;
}

void ScenarioConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

env::SuEnvironment su_environment(const ScenarioConfig& config, std::size_t su) {
  env::SuEnvironment m;
  m.channel_matrices.reserve(config.channels.size());
  for (const auto& c : config.channels) m.channel_matrices.push_back(env::channel_transition_matrix(c));
  const auto& s = config.sus.at(su);
  m.rates = s.rates;
  m.traffic = s.traffic;
  m.capacity = s.buffer_capacity;
  return m;
}

void resolve_defaults(ScenarioConfig& config) {
  config.validate();
  for (std::size_t i = 0; i < config.sus.size(); ++i) {
    auto& policy = config.sus[i].policy;
    if (auto* f = std::get_if<strategies::FixedPolicy>(&policy); f && f->bids.empty()) {
      f->bids = strategies::default_fixed_bids(su_environment(config, i));
    }
    if (auto* l = std::get_if<strategies::LearningPolicy>(&policy); l && !l->gamma_max) {
      l->gamma_max = strategies::max_myopic_bid(su_environment(config, i));
    }
  }
}

// ---------------------------------------------------------------------------

World::World(ScenarioConfig config) : config_(std::move(config)) {
  resolve_defaults(config_);
  const std::size_t n = config_.channels.size();
  const std::uint64_t seed = config_.seed;

  tie_rng_ = make_stream(seed, kTieStream);
  channel_rng_.reserve(n);
  for (std::size_t j = 0; j < n; ++j) channel_rng_.push_back(make_stream(seed, kChannelStreamBase + j));

  sus_.resize(config_.sus.size());
  for (std::size_t i = 0; i < sus_.size(); ++i) {
    auto& a = sus_[i];
    a.model = su_environment(config_, i);
    a.levels.assign(n, 0);
    a.traffic_rng = make_stream(seed, kTrafficStreamBase + i);
    if (const auto* l = std::get_if<strategies::LearningPolicy>(&config_.sus[i].policy)) {
      learning::LearnerConfig lc;
      lc.discount = config_.sus[i].discount;
      lc.classes = l->classes;
      lc.gamma_max = l->gamma_max.value_or(0.0);
      lc.epsilon = l->epsilon;
      lc.freeze_values = l->freeze_values;
      auto lrng = make_stream(seed, kLearnerStreamBase + i);
      a.learner = std::make_unique<learning::Learner>(a.model, lc, lrng());
    }
  }

  // Start every channel from the stationary law of its joint chain.
  available_.assign(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const auto pi = env::stationary_distribution(env::channel_transition_matrix(config_.channels[j]));
    available_[j] = uniform01(channel_rng_[j]) < 1.0 - pi[0];
    if (!available_[j]) continue;
    const std::vector<double> cond(pi.begin() + 1, pi.end());
    const double mass = std::accumulate(cond.begin(), cond.end(), 0.0);
    std::vector<double> normalized(cond.size());
    for (std::size_t k = 0; k < cond.size(); ++k) normalized[k] = mass > 0.0 ? cond[k] / mass : 0.0;
    for (auto& a : sus_) a.levels[j] = 1 + env::sample_index(normalized, channel_rng_[j]);
  }
}

env::SUState World::su_state(std::size_t su) const {
  const auto& a = sus_.at(su);
  env::SUState s;
  s.buffer = {a.occupancy, a.model.capacity};
  s.channels.reserve(a.levels.size());
  for (int l : a.levels) s.channels.push_back({l});
  return s;
}

void World::advance_channels() {
  for (std::size_t j = 0; j < config_.channels.size(); ++j) {
    const auto& model = config_.channels[j];
    auto& rng = channel_rng_[j];
    const bool was = available_[j];
    const double u = uniform01(rng);
    const bool now = was ? !(u < model.p_fn) : (u < model.p_nf);
    available_[j] = now;
    for (auto& a : sus_) {
      int& level = a.levels[j];
      if (!now) {
        level = 0;
      } else if (was) {
        level = 1 + env::sample_index(model.cond_trans[static_cast<std::size_t>(level - 1)], rng);
      } else {
        level = 1 + env::sample_index(model.entry_dist, rng);
      }
    }
  }
}

SlotRecord World::step() {
  advance_channels();
  const std::size_t m = sus_.size();
  const std::size_t n = config_.channels.size();

  std::vector<env::SUState> states(m);
  std::vector<std::vector<double>> bids(m);
  for (std::size_t i = 0; i < m; ++i) {
    states[i] = su_state(i);
    strategies::Observation obs{states[i], available_, sus_[i].last};
    bids[i] = strategies::act(config_.sus[i].policy, obs, sus_[i].model, sus_[i].learner.get());
  }

  // The mechanism breaks ties by position; present SUs in a random order so
  // that no SU is favoured.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), tie_rng_);
  auction::BidMatrix matrix(m, n);
  for (std::size_t j = 0; j < n; ++j) matrix.set_available(j, available_[j]);
  for (std::size_t r = 0; r < m; ++r) matrix.set_row(r, bids[order[r]]);
  const auto outcome = auction::run_auction(matrix);
  check_outcome(matrix, outcome);

  std::vector<int> channel(m, env::kNoChannel);
  std::vector<double> tax(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    channel[order[r]] = outcome.allocation.channel_of[r];
    tax[order[r]] = outcome.taxes[r];
  }

  SlotRecord rec;
  rec.slot = slot_;
  rec.availability = available_;
  rec.sus.resize(m);
  const double dt = config_.slot_len;
  for (std::size_t i = 0; i < m; ++i) {
    auto& a = sus_[i];
    const auto& s = states[i];
    const int level = env::assigned_level(s, channel[i]);
    const int remainder = env::served_remainder(s.buffer, level, a.model.rates, dt);
    const int arrivals = env::sample_arrivals(a.model.traffic, a.traffic_rng);
    const int lost = env::packet_loss(s.buffer, level, a.model.rates, dt, arrivals);
    const auto next = env::buffer_next(s.buffer, level, a.model.rates, dt, arrivals);
    const int served = s.buffer.occupancy - remainder;
    if (s.buffer.occupancy + arrivals != served + next.occupancy + lost) {
      throw std::logic_error("packet conservation violated");
    }

    const double reward = -static_cast<double>(lost) + tax[i];
    if (a.learner) a.learner->observe(s, bids[i], available_, channel[i], tax[i], reward);

    auto& r = rec.sus[i];
    r.buffer = s.buffer.occupancy;
    r.arrivals = arrivals;
    r.served = served;
    r.lost = lost;
    r.tax = tax[i];
    r.cost = static_cast<double>(lost) - tax[i];
    r.channel = channel[i];
    r.bids = bids[i];
    r.levels = a.levels;

    a.last = {bids[i], channel[i], tax[i]};
    a.occupancy = next.occupancy;
  }
  ++slot_;
  return rec;
}

SlotRecord run_slot(World& world) { return world.step(); }

RunResult run_scenario(const ScenarioConfig& config) {
  World world(config);
  RunResult out;
  out.records.reserve(static_cast<std::size_t>(world.config().horizon));
  for (int t = 0; t < world.config().horizon; ++t) out.records.push_back(world.step());
  out.summary = summarize(out.records, world.config().window);
  return out;
}

SummaryStats summarize(std::span<const SlotRecord> records, int window) {
  if (window < 1 || static_cast<std::size_t>(window) > records.size()) {
    throw SizeError("summarize: window must be in [1, number of records]");
  }
  const auto tail = records.subspan(records.size() - static_cast<std::size_t>(window));
  const std::size_t m = tail.front().sus.size();
  SummaryStats stats;
  stats.window = window;
  stats.sus.resize(m);
  const double t = static_cast<double>(window);
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t arrived = 0, lost = 0;
    double tax = 0.0, cost = 0.0, reward = 0.0;
    for (const auto& rec : tail) {
      const auto& r = rec.sus.at(i);
      arrived += r.arrivals;
      lost += r.lost;
      tax += -r.tax;
      cost += r.cost;
      reward += -static_cast<double>(r.lost) + r.tax;
    }
    auto& s = stats.sus[i];
    s.total_arrived = arrived;
    s.total_lost = lost;
    s.loss_rate_pct = arrived > 0 ? 100.0 * static_cast<double>(lost) / static_cast<double>(arrived) : 0.0;
    s.avg_loss = static_cast<double>(lost) / t;
    s.avg_tax = tax / t;
    s.avg_cost = cost / t;
    s.avg_reward = reward / t;
  }
  return stats;
}

}  // namespace cogbid::sim
