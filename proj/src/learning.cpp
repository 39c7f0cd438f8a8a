#include "cogbid/learning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogbid/errors.hpp"

namespace cogbid::learning {

namespace {

int alloc_index(int assigned_channel) {
  return assigned_channel == env::kNoChannel ? 0 : assigned_channel + 1;
}

void check_shapes(const env::SUState& s, const ValueTable& table, const env::SuEnvironment& model,
                  const TransitionCounts& counts) {
  const auto& space = table.space();
  if (static_cast<int>(s.channels.size()) != space.channels() ||
      model.num_channels() != space.channels() || counts.channels() != space.channels()) {
    throw DimensionError("learner: channel count mismatch between state, model and tables");
  }
  if (s.buffer.capacity != space.capacity() || model.capacity != space.capacity()) {
    throw DimensionError("learner: buffer capacity mismatch between state, model and tables");
  }
  if (counts.classes() != table.classes()) {
    throw DimensionError("learner: class count mismatch between counts and value table");
  }
}

// Distribution over next channel profiles, indexed like StateSpace::profile_index.
std::vector<double> next_profile_distribution(const env::SUState& s, const env::SuEnvironment& model) {
  std::vector<double> dist{1.0};
  for (std::size_t j = 0; j < s.channels.size(); ++j) {
    const auto row = model.channel_matrices[j].row(static_cast<std::size_t>(s.channels[j].level));
    std::vector<double> next(dist.size() * row.size(), 0.0);
    for (std::size_t p = 0; p < dist.size(); ++p) {
      for (std::size_t l = 0; l < row.size(); ++l) next[p * row.size() + l] = dist[p] * row[l];
    }
    dist.swap(next);
  }
  return dist;
}

double weighted_value(const std::vector<double>& buffer_dist, const std::vector<double>& profile_dist,
                      const std::vector<double>& class_dist, const ValueTable& table) {
  const std::size_t profiles = profile_dist.size();
  double total = 0.0;
  for (std::size_t v = 0; v < buffer_dist.size(); ++v) {
    if (buffer_dist[v] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t p = 0; p < profiles; ++p) {
      if (profile_dist[p] == 0.0) continue;
      const std::size_t idx = v * profiles + p;
      double e = 0.0;
      for (int h = 1; h <= table.classes(); ++h) {
        e += class_dist[static_cast<std::size_t>(h - 1)] * table.value(idx, h);
      }
      inner += profile_dist[p] * e;
    }
    total += buffer_dist[v] * inner;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------

OpponentClassifier::OpponentClassifier(double gamma_max, int classes)
    : gamma_max_(gamma_max), classes_(classes) {
  if (classes < 1) throw ModelError("classifier needs at least one class");
  if (!(gamma_max >= 0.0) || !std::isfinite(gamma_max)) {
    throw ModelError("maximum tax magnitude must be finite and >= 0");
  }
}

void OpponentClassifier::set_last_class(int h) {
  if (h < 1 || h > classes_) throw DomainError("class out of range");
  last_class_ = h;
}

std::vector<double> OpponentClassifier::thresholds() const {
  std::vector<double> t(static_cast<std::size_t>(classes_) + 1);
  for (int h = 0; h <= classes_; ++h) t[static_cast<std::size_t>(h)] = gamma_max_ * h / classes_;
  t.back() = gamma_max_;
  return t;
}

int OpponentClassifier::class_of(double magnitude) const {
  const auto t = thresholds();
  for (int h = 1; h <= classes_; ++h) {
    if (magnitude < t[static_cast<std::size_t>(h)]) return h;
  }
  return classes_;
}

int OpponentClassifier::classify(int assigned_channel, double tax, std::span<const double> own_bids,
                                 const std::vector<bool>& availability) {
  if (assigned_channel != env::kNoChannel) {
    last_class_ = class_of(std::abs(tax));
    return last_class_;
  }
  bool any = false;
  double lowest = 0.0;
  for (std::size_t j = 0; j < availability.size(); ++j) {
    if (!availability[j]) continue;
    const double b = j < own_bids.size() ? own_bids[j] : 0.0;
    lowest = any ? std::min(lowest, b) : b;
    any = true;
  }
  if (any) last_class_ = class_of(std::max(lowest, 0.0));
  return last_class_;
}

TransitionCounts::TransitionCounts(int classes, int channels)
    : classes_(classes), channels_(channels),
      data_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes) *
                static_cast<std::size_t>(channels + 1),
            0) {
  if (classes < 1 || channels < 1) throw DimensionError("transition counts need H >= 1, N >= 1");
}

std::size_t TransitionCounts::offset(int h_next, int h_prev, int alloc) const {
  if (h_next < 1 || h_next > classes_ || h_prev < 1 || h_prev > classes_ || alloc < 0 ||
      alloc > channels_) {
    throw DomainError("transition count index out of range");
  }
  const auto h = static_cast<std::size_t>(classes_);
  return (static_cast<std::size_t>(h_next - 1) * h + static_cast<std::size_t>(h_prev - 1)) *
             static_cast<std::size_t>(channels_ + 1) +
         static_cast<std::size_t>(alloc);
}

std::uint64_t TransitionCounts::total() const {
  std::uint64_t t = 0;
  for (auto c : data_) t += c;
  return t;
}

ValueTable::ValueTable(env::StateSpace space, int classes)
    : space_(space), classes_(classes),
      values_(space.size() * static_cast<std::size_t>(classes), 0.0),
      visits_(space.size() * static_cast<std::size_t>(classes), 0) {
  if (classes < 1) throw DimensionError("value table needs at least one class");
}

std::size_t ValueTable::key(std::size_t state_index, int h) const {
  if (state_index >= space_.size() || h < 1 || h > classes_) {
    throw DomainError("value table key out of range");
  }
  return state_index * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(h - 1);
}

double learning_rate(std::uint64_t visits) { return 1.0 / (2.0 + static_cast<double>(visits)); }

void update_transition_counts(TransitionCounts& counts, int h_prev, int h_new, int assigned_channel) {
  counts.increment(h_new, h_prev, alloc_index(assigned_channel));
}

std::vector<double> estimate_opponent_transition(const TransitionCounts& counts, int h_cur,
                                                 int assigned_channel) {
  const int j = alloc_index(assigned_channel);
  const auto h = static_cast<std::size_t>(counts.classes());
  std::vector<double> q(h, 0.0);
  std::uint64_t column = 0;
  for (int next = 1; next <= counts.classes(); ++next) column += counts.at(next, h_cur, j);
  if (column == 0) {
    std::fill(q.begin(), q.end(), 1.0 / static_cast<double>(h));
    return q;
  }
  for (int next = 1; next <= counts.classes(); ++next) {
    q[static_cast<std::size_t>(next - 1)] =
        static_cast<double>(counts.at(next, h_cur, j)) / static_cast<double>(column);
  }
  return q;
}

double expected_future_value(const env::SUState& s, int h, int assigned_channel,
                             const ValueTable& table, const env::SuEnvironment& model,
                             const TransitionCounts& counts) {
  check_shapes(s, table, model, counts);
  const auto buffer_dist =
      env::buffer_kernel(s.buffer, env::assigned_level(s, assigned_channel), model.rates, model.traffic);
  return weighted_value(buffer_dist, next_profile_distribution(s, model),
                        estimate_opponent_transition(counts, h, assigned_channel), table);
}

double compute_stage_q(const env::SUState& s, int h, double realized_reward, int assigned_channel,
                       const ValueTable& table, const env::SuEnvironment& model,
                       const TransitionCounts& counts, double discount) {
  if (discount == 0.0) return realized_reward;
  return realized_reward +
         discount * expected_future_value(s, h, assigned_channel, table, model, counts);
}

void update_value_table(ValueTable& table, std::size_t state_index, int h, double q,
                        const LearningRateSchedule& schedule) {
  auto& visits = table.visits(state_index, h);
  const double gamma = schedule(visits);
  auto& v = table.value(state_index, h);
  v = (1.0 - gamma) * v + gamma * q;
  ++visits;
}

std::vector<double> compute_preference_bids(const env::SUState& s, int h, const ValueTable& table,
                                            const env::SuEnvironment& model,
                                            const TransitionCounts& counts, double discount) {
  check_shapes(s, table, model, counts);
  const std::size_t n = s.channels.size();
  std::vector<double> bids(n, 0.0);

  bool any_available = false;
  for (const auto& c : s.channels) any_available = any_available || c.available();
  if (!any_available) return bids;

  std::vector<double> profile;
  double idle_future = 0.0;
  if (discount != 0.0) {
    profile = next_profile_distribution(s, model);
    idle_future = weighted_value(env::buffer_kernel(s.buffer, 0, model.rates, model.traffic), profile,
                                 estimate_opponent_transition(counts, h, env::kNoChannel), table);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const int level = s.channels[j].level;
    if (level == 0) continue;
    const double gain = env::service_benefit(s.buffer, level, model.rates, model.traffic);
    double future = 0.0;
    if (discount != 0.0) {
      const double served_future =
          weighted_value(env::buffer_kernel(s.buffer, level, model.rates, model.traffic), profile,
                         estimate_opponent_transition(counts, h, static_cast<int>(j)), table);
      future = discount * (served_future - idle_future);
    }
    bids[j] = std::max(gain + future, 0.0);
  }
  return bids;
}

// ---------------------------------------------------------------------------

Learner::Learner(env::SuEnvironment model, LearnerConfig config, std::uint64_t seed)
    : model_(std::move(model)), config_(config), classifier_(config.gamma_max, config.classes),
      counts_(config.classes, model_.num_channels()),
      values_(env::StateSpace(model_.capacity, model_.levels(), model_.num_channels()), config.classes),
      rng_(seed) {
  if (!(config.discount >= 0.0 && config.discount < 1.0)) {
    throw ModelError("discount must be in [0,1)");
  }
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw ModelError("exploration probability must be in [0,1]");
  }
}

std::vector<double> Learner::bids(const env::SUState& s) {
  auto b = compute_preference_bids(s, classifier_.last_class(), values_, model_, counts_,
                                   config_.discount);
  if (config_.epsilon > 0.0 && uniform01(rng_) < config_.epsilon) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      b[j] = s.channels[j].available() ? uniform01(rng_) * classifier_.gamma_max() : 0.0;
    }
  }
  return b;
}

void Learner::observe(const env::SUState& s, std::span<const double> own_bids,
                      const std::vector<bool>& availability, int assigned_channel, double tax,
                      double realized_reward) {
  const int h = classifier_.classify(assigned_channel, tax, own_bids, availability);
  if (prev_class_) counts_.increment(h, *prev_class_, prev_alloc_);
  const double q = compute_stage_q(s, h, realized_reward, assigned_channel, values_, model_, counts_,
                                   config_.discount);
  if (!config_.freeze_values) {
    update_value_table(values_, values_.space().index(s), h, q);
  }
  prev_class_ = h;
  prev_alloc_ = alloc_index(assigned_channel);
}

nlohmann::json Learner::snapshot() const {
  std::ostringstream rng_state;
  rng_state << rng_;
  const auto& space = values_.space();
  return {
      {"format", "cogbid-learner"},
      {"version", kSnapshotVersion},
      {"dims",
       {{"capacity", space.capacity()},
        {"levels", space.levels()},
        {"channels", space.channels()},
        {"classes", values_.classes()}}},
      {"config",
       {{"discount", config_.discount},
        {"classes", config_.classes},
        {"gamma_max", config_.gamma_max},
        {"epsilon", config_.epsilon},
        {"freeze_values", config_.freeze_values}}},
      {"classifier", {{"last_class", classifier_.last_class()}}},
      {"previous",
       {{"class", prev_class_ ? *prev_class_ : 0}, {"alloc", prev_alloc_}}},
      {"counts", counts_.raw()},
      {"values", values_.raw_values()},
      {"visits", values_.raw_visits()},
      {"rng", rng_state.str()},
  };
}

Learner Learner::restore(env::SuEnvironment model, const nlohmann::json& snap) {
  if (snap.value("format", "") != "cogbid-learner") throw ConfigError("not a learner snapshot");
  if (snap.at("version").get<int>() != kSnapshotVersion) {
    throw ConfigError("unsupported learner snapshot version " + snap.at("version").dump());
  }
  const auto& dims = snap.at("dims");
  if (dims.at("capacity").get<int>() != model.capacity || dims.at("levels").get<int>() != model.levels() ||
      dims.at("channels").get<int>() != model.num_channels()) {
    throw DimensionError("learner snapshot dimensions differ from the model");
  }
  const auto& c = snap.at("config");
  LearnerConfig cfg;
  cfg.discount = c.at("discount").get<double>();
  cfg.classes = c.at("classes").get<int>();
  cfg.gamma_max = c.at("gamma_max").get<double>();
  cfg.epsilon = c.at("epsilon").get<double>();
  cfg.freeze_values = c.at("freeze_values").get<bool>();

  Learner l(std::move(model), cfg);
  l.classifier_.set_last_class(snap.at("classifier").at("last_class").get<int>());
  const int prev = snap.at("previous").at("class").get<int>();
  if (prev > 0) l.prev_class_ = prev;
  l.prev_alloc_ = snap.at("previous").at("alloc").get<int>();

  auto counts = snap.at("counts").get<std::vector<std::uint64_t>>();
  auto values = snap.at("values").get<std::vector<double>>();
  auto visits = snap.at("visits").get<std::vector<std::uint64_t>>();
  if (counts.size() != l.counts_.raw().size() || values.size() != l.values_.size() ||
      visits.size() != l.values_.size()) {
    throw DimensionError("learner snapshot table sizes differ from the model");
  }
  l.counts_.raw() = std::move(counts);
  l.values_.raw_values() = std::move(values);
  l.values_.raw_visits() = std::move(visits);
  std::istringstream rng_state(snap.at("rng").get<std::string>());
  rng_state >> l.rng_;
  return l;
}

}  // namespace cogbid::learning
