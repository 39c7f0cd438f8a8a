#include "cogbid/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cogbid/errors.hpp"

namespace cogbid::env {

namespace {

constexpr double kStochasticTol = 1e-12;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double x : p) {
    if (!is_probability(x)) throw ModelError(what + ": entries must lie in [0,1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    throw ModelError(what + ": entries must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

double pmf_value(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

}  // namespace

double TransitionMatrix::max_row_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < n_; ++r) {
    double sum = 0.0;
    for (double x : row(r)) sum += x;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

void ChannelModel::validate() const {
  if (!is_probability(p_nf)) throw ModelError("p_nf must lie in [0,1]");
  if (!is_probability(p_fn)) throw ModelError("p_fn must lie in [0,1]");
  const std::size_t k = snr_db.size();
  if (k == 0) throw ModelError("channel needs at least one SNR level");
  for (std::size_t i = 1; i < k; ++i) {
    if (!(snr_db[i] > snr_db[i - 1])) throw ModelError("snr levels must be strictly increasing");
  }
  if (entry_dist.size() != k) throw ModelError("entry distribution must have K entries");
  require_distribution(entry_dist, "entry distribution");
  if (cond_trans.size() != k) throw ModelError("condition matrix must be K x K");
  for (std::size_t l = 0; l < k; ++l) {
    if (cond_trans[l].size() != k) throw ModelError("condition matrix must be K x K");
    require_distribution(cond_trans[l], "condition matrix row " + std::to_string(l + 1));
  }
}

TrafficModel TrafficModel::make(double mu, double slot_len) {
  TrafficModel t;
  t.mu = mu;
  t.slot_len = slot_len;
  const double m = std::max(0.0, mu * slot_len);
  t.tail_cap = static_cast<int>(std::ceil(m + 10.0 * std::sqrt(m))) + 10;
  return t;
}

void TrafficModel::validate() const {
  if (!(mu >= 0.0)) throw ModelError("arrival rate must be >= 0");
  if (!(slot_len > 0.0)) throw ModelError("slot length must be > 0");
  const double m = mu * slot_len;
  if (tail_cap < std::ceil(m) + 10.0 * std::sqrt(m)) {
    throw ModelError("tail_cap too small for the arrival mean");
  }
}

RateTable RateTable::from_packets_per_slot(std::span<const int> per_slot, double slot_len) {
  RateTable r;
  r.rate_per_level.reserve(per_slot.size() + 1);
  r.rate_per_level.push_back(0.0);
  for (int p : per_slot) r.rate_per_level.push_back(p / slot_len);
  return r;
}

int RateTable::quantum(int level, double slot_len) const {
  // Rates built from whole packets per slot land a hair below the integer.
  return static_cast<int>(std::floor(rate_per_level.at(level) * slot_len + 1e-9));
}

void RateTable::validate() const {
  if (rate_per_level.size() < 2) throw ModelError("rate table needs K+1 >= 2 entries");
  if (rate_per_level[0] != 0.0) throw ModelError("rate on an unavailable channel must be 0");
  for (std::size_t i = 1; i < rate_per_level.size(); ++i) {
    if (rate_per_level[i] < rate_per_level[i - 1]) {
      throw ModelError("rate table must be non-decreasing in level");
    }
  }
}

StateSpace::StateSpace(int capacity, int levels, int channels)
    : capacity_(capacity), levels_(levels), channels_(channels), profiles_(1) {
  if (capacity < 0 || levels < 1 || channels < 1) {
    throw DimensionError("state space needs B >= 0, K >= 1, N >= 1");
  }
  for (int j = 0; j < channels; ++j) profiles_ *= static_cast<std::size_t>(levels + 1);
  size_ = static_cast<std::size_t>(capacity + 1) * profiles_;
}

std::size_t StateSpace::profile_index(std::span<const ChannelState> w) const {
  if (static_cast<int>(w.size()) != channels_) throw DimensionError("channel profile length");
  std::size_t idx = 0;
  for (const auto& c : w) {
    if (c.level < 0 || c.level > levels_) throw DimensionError("channel level out of range");
    idx = idx * static_cast<std::size_t>(levels_ + 1) + static_cast<std::size_t>(c.level);
  }
  return idx;
}

std::size_t StateSpace::index(const SUState& s) const {
  if (s.buffer.occupancy < 0 || s.buffer.occupancy > capacity_) {
    throw DimensionError("buffer occupancy out of range");
  }
  return static_cast<std::size_t>(s.buffer.occupancy) * profiles_ + profile_index(s.channels);
}

SUState StateSpace::state(std::size_t index) const {
  if (index >= size_) throw DimensionError("state index out of range");
  SUState s;
  s.buffer = {static_cast<int>(index / profiles_), capacity_};
  std::size_t rest = index % profiles_;
  s.channels.resize(static_cast<std::size_t>(channels_));
  for (int j = channels_ - 1; j >= 0; --j) {
    s.channels[static_cast<std::size_t>(j)].level =
        static_cast<int>(rest % static_cast<std::size_t>(levels_ + 1));
    rest /= static_cast<std::size_t>(levels_ + 1);
  }
  return s;
}

TransitionMatrix channel_transition_matrix(const ChannelModel& model) {
  model.validate();
  const auto k = static_cast<std::size_t>(model.levels());
  TransitionMatrix m(k + 1);
  m(0, 0) = 1.0 - model.p_nf;
  for (std::size_t c = 1; c <= k; ++c) m(0, c) = model.p_nf * model.entry_dist[c - 1];
  for (std::size_t l = 1; l <= k; ++l) {
    m(l, 0) = model.p_fn;
    for (std::size_t c = 1; c <= k; ++c) m(l, c) = (1.0 - model.p_fn) * model.cond_trans[l - 1][c - 1];
  }
  return m;
}

std::vector<double> stationary_distribution(const TransitionMatrix& matrix) {
  const std::size_t n = matrix.size();
  std::vector<double> cur(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  std::vector<double> avg(n, 0.0);
  constexpr int kIters = 4096;
  for (int it = 0; it < kIters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) next[c] += cur[r] * matrix(r, c);
    }
    cur.swap(next);
    for (std::size_t c = 0; c < n; ++c) avg[c] += cur[c];
  }
  double total = 0.0;
  for (double x : avg) total += x;
  for (double& x : avg) x /= total;
  return avg;
}

int sample_index(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

ChannelState step_channel(ChannelState state, const TransitionMatrix& matrix, Rng& rng) {
  return {sample_index(matrix.row(static_cast<std::size_t>(state.level)), rng)};
}

double joint_channel_prob(std::span<const ChannelState> next, std::span<const ChannelState> cur,
                          std::span<const TransitionMatrix> matrices) {
  if (next.size() != cur.size() || cur.size() != matrices.size()) {
    throw DimensionError("joint_channel_prob: state lists and matrices differ in length");
  }
  double p = 1.0;
  for (std::size_t j = 0; j < cur.size(); ++j) {
    p *= matrices[j](static_cast<std::size_t>(cur[j].level), static_cast<std::size_t>(next[j].level));
  }
  return p;
}

double arrival_pmf(const TrafficModel& traffic, int n) {
  if (n < 0) throw DomainError("arrival_pmf: n must be >= 0");
  return pmf_value(traffic.mean_per_slot(), n);
}

int sample_arrivals(const TrafficModel& traffic, Rng& rng) {
  const double m = traffic.mean_per_slot();
  if (m <= 0.0) return 0;
  std::poisson_distribution<int> dist(m);
  return dist(rng);
}

int served_remainder(BufferState v, int level, const RateTable& rates, double slot_len) {
  return std::max(v.occupancy - rates.quantum(level, slot_len), 0);
}

BufferState buffer_next(BufferState v, int level, const RateTable& rates, double slot_len,
                        int arrivals) {
  const int rem = served_remainder(v, level, rates, slot_len);
  return {std::min(rem + arrivals, v.capacity), v.capacity};
}

std::vector<double> buffer_kernel(BufferState v, int level, const RateTable& rates,
                                  const TrafficModel& traffic) {
  const int cap = v.capacity;
  const int rem = served_remainder(v, level, rates, traffic.slot_len);
  std::vector<double> out(static_cast<std::size_t>(cap) + 1, 0.0);
  const double m = traffic.mean_per_slot();
  double below = 0.0;
  for (int h = 0; h < cap - rem; ++h) {
    const double p = pmf_value(m, h);
    out[static_cast<std::size_t>(rem + h)] = p;
    below += p;
  }
  out[static_cast<std::size_t>(cap)] = std::max(0.0, 1.0 - below);
  return out;
}

int packet_loss(BufferState v, int level, const RateTable& rates, double slot_len,
                int next_arrivals) {
  const int rem = served_remainder(v, level, rates, slot_len);
  return std::max(rem + next_arrivals - v.capacity, 0);
}

double expected_loss(BufferState v, int level, const RateTable& rates,
                     const TrafficModel& traffic) {
  const int headroom = v.capacity - served_remainder(v, level, rates, traffic.slot_len);
  const double m = traffic.mean_per_slot();
  double sum = 0.0;
  for (int a = headroom + 1; a <= traffic.tail_cap; ++a) {
    sum += pmf_value(m, a) * static_cast<double>(a - headroom);
  }
  return sum;
}

int assigned_level(const SUState& s, int assigned_channel) {
  if (assigned_channel == kNoChannel) return 0;
  if (assigned_channel < 0 || assigned_channel >= static_cast<int>(s.channels.size())) {
    throw DimensionError("assigned channel index out of range");
  }
  return s.channels[static_cast<std::size_t>(assigned_channel)].level;
}

double state_transition_prob(const SUState& s, int assigned_channel, const SUState& next,
                             const SuEnvironment& model) {
  if (s.channels.size() != model.channel_matrices.size() ||
      next.channels.size() != model.channel_matrices.size()) {
    throw DimensionError("state_transition_prob: channel count differs from the model");
  }
  if (s.buffer.capacity != model.capacity || next.buffer.capacity != model.capacity) {
    throw DimensionError("state_transition_prob: buffer capacity differs from the model");
  }
  const int v_next = next.buffer.occupancy;
  if (v_next < 0 || v_next > model.capacity) return 0.0;
  const auto kernel =
      buffer_kernel(s.buffer, assigned_level(s, assigned_channel), model.rates, model.traffic);
  const double buffer_factor = kernel[static_cast<std::size_t>(v_next)];
  if (buffer_factor == 0.0) return 0.0;
  return buffer_factor * joint_channel_prob(next.channels, s.channels, model.channel_matrices);
}

double service_benefit(BufferState v, int level, const RateTable& rates, const TrafficModel& traffic) {
  return expected_loss(v, 0, rates, traffic) - expected_loss(v, level, rates, traffic);
}

}  // namespace cogbid::env
