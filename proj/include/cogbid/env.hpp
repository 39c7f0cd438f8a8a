#pragma once

// Environment models for one secondary user: per-channel availability and
// SNR-condition Markov chains, Poisson packet arrivals and a finite buffer.
// Everything here exists twice: as a sampler driven by an Rng and as an exact
// probability kernel used by the learner and by the tests.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cogbid/rng.hpp"

namespace cogbid::env {

/// Dense row-major square matrix of transition probabilities.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * n_, n_}; }

  /// Largest |row sum - 1| over all rows.
  double max_row_error() const;

  bool operator==(const TransitionMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Availability chain (PU ON/OFF) plus the K-level SNR chain seen while the
/// channel is free.
struct ChannelModel {
  double p_nf = 0.5;                  ///< ON -> OFF: channel becomes available
  double p_fn = 0.5;                  ///< OFF -> ON: channel is reclaimed
  std::vector<double> snr_db;         ///< K strictly increasing levels
  std::vector<double> entry_dist;     ///< level distribution on becoming available
  std::vector<std::vector<double>> cond_trans;  ///< K x K level chain while available

  int levels() const noexcept { return static_cast<int>(snr_db.size()); }

  /// Throws ModelError describing the first violated invariant.
  void validate() const;

  bool operator==(const ChannelModel&) const = default;
};

/// Joint (availability, SNR) state of one channel as seen by one SU.
/// Level 0 is "unavailable"; level k >= 1 is "available at snr_db[k-1]".
struct ChannelState {
  int level = 0;

  bool available() const noexcept { return level >= 1; }
  bool operator==(const ChannelState&) const = default;
};

struct TrafficModel {
  double mu = 0.0;        ///< packets per second
  double slot_len = 0.01; ///< seconds
  int tail_cap = 0;       ///< truncation bound for pmf sums

  /// Builds a model with tail_cap sized so that the omitted mass is < 1e-9.
  static TrafficModel make(double mu, double slot_len);

  double mean_per_slot() const noexcept { return mu * slot_len; }
  void validate() const;

  bool operator==(const TrafficModel&) const = default;
};

/// Transmission rate per channel level in packets per second. Entry 0 is the
/// rate on an unavailable channel and is always zero.
struct RateTable {
  std::vector<double> rate_per_level;

  /// Convenience constructor from whole packets per slot for levels 1..K.
  static RateTable from_packets_per_slot(std::span<const int> per_slot, double slot_len);

  /// Whole packets served in one slot at the given level.
  int quantum(int level, double slot_len) const;
  int levels() const noexcept { return static_cast<int>(rate_per_level.size()) - 1; }
  void validate() const;

  bool operator==(const RateTable&) const = default;
};

struct BufferState {
  int occupancy = 0;
  int capacity = 0;

  bool operator==(const BufferState&) const = default;
};

/// Auction-time decision state of one SU: buffer plus one ChannelState per channel.
struct SUState {
  BufferState buffer;
  std::vector<ChannelState> channels;

  bool operator==(const SUState&) const = default;
};

/// Everything an SU knows about its own environment: the per-channel joint
/// kernels, its rate table, its traffic and its buffer capacity.
struct SuEnvironment {
  std::vector<TransitionMatrix> channel_matrices;
  RateTable rates;
  TrafficModel traffic;
  int capacity = 0;

  int num_channels() const noexcept { return static_cast<int>(channel_matrices.size()); }
  int levels() const noexcept { return rates.levels(); }
  double slot_len() const noexcept { return traffic.slot_len; }
};

/// Enumeration of the (B+1)(K+1)^N states of one SU.
class StateSpace {
 public:
  StateSpace(int capacity, int levels, int channels);

  std::size_t size() const noexcept { return size_; }
  std::size_t channel_profiles() const noexcept { return profiles_; }
  int capacity() const noexcept { return capacity_; }
  int levels() const noexcept { return levels_; }
  int channels() const noexcept { return channels_; }

  std::size_t index(const SUState& s) const;
  SUState state(std::size_t index) const;
  /// Index of the channel profile alone, in [0, (K+1)^N).
  std::size_t profile_index(std::span<const ChannelState> w) const;

 private:
  int capacity_;
  int levels_;
  int channels_;
  std::size_t profiles_;
  std::size_t size_;
};

inline constexpr int kNoChannel = -1;

// ---------------------------------------------------------------------------
// Channel chain

/// (K+1) x (K+1) kernel of the joint availability/SNR chain.
TransitionMatrix channel_transition_matrix(const ChannelModel& model);

/// Stationary distribution of a transition matrix (Cesaro-averaged power
/// iteration, so periodic chains are handled).
std::vector<double> stationary_distribution(const TransitionMatrix& matrix);

/// Index drawn from a discrete distribution given as probabilities.
int sample_index(std::span<const double> probs, Rng& rng);

ChannelState step_channel(ChannelState state, const TransitionMatrix& matrix, Rng& rng);

/// Product over channels of matrix_j[cur_j][next_j].
double joint_channel_prob(std::span<const ChannelState> next, std::span<const ChannelState> cur,
                          std::span<const TransitionMatrix> matrices);

// ---------------------------------------------------------------------------
// Traffic and buffer

double arrival_pmf(const TrafficModel& traffic, int n);
int sample_arrivals(const TrafficModel& traffic, Rng& rng);

int served_remainder(BufferState v, int level, const RateTable& rates, double slot_len);
BufferState buffer_next(BufferState v, int level, const RateTable& rates, double slot_len,
                        int arrivals);

/// Distribution of next-slot occupancy over [0, B].
std::vector<double> buffer_kernel(BufferState v, int level, const RateTable& rates,
                                  const TrafficModel& traffic);

int packet_loss(BufferState v, int level, const RateTable& rates, double slot_len,
                int next_arrivals);

/// E[(remainder + A - B)^+] under the Poisson arrival law.
double expected_loss(BufferState v, int level, const RateTable& rates,
                     const TrafficModel& traffic);

/// q(s' | s, z): buffer factor times channel factor. `assigned_channel` is a
/// 0-based channel index or kNoChannel.
double state_transition_prob(const SUState& s, int assigned_channel, const SUState& next,
                             const SuEnvironment& model);

/// Level of the channel an SU was assigned, or 0 when it holds none.
int assigned_level(const SUState& s, int assigned_channel);

/// Expected loss avoided by holding a channel at `level` instead of none.
double service_benefit(BufferState v, int level, const RateTable& rates, const TrafficModel& traffic);

}  // namespace cogbid::env
