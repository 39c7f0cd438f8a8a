#pragma once

// Per-slot channel auction run by the spectrum moderator: welfare-maximizing
// assignment of available channels (one channel per SU, one SU per channel)
// and VCG taxes. Taxes are reported as non-positive numbers.

#include <cstddef>
#include <vector>

namespace cogbid::auction {

/// Bids of M SUs on N channels together with the announced availability.
class BidMatrix {
 public:
  BidMatrix() = default;
  BidMatrix(std::size_t num_sus, std::size_t num_channels)
      : sus_(num_sus), channels_(num_channels), values_(num_sus * num_channels, 0.0),
        available_(num_channels, true) {}

  std::size_t num_sus() const noexcept { return sus_; }
  std::size_t num_channels() const noexcept { return channels_; }

  double& operator()(std::size_t su, std::size_t ch) { return values_[su * channels_ + ch]; }
  double operator()(std::size_t su, std::size_t ch) const { return values_[su * channels_ + ch]; }

  bool available(std::size_t ch) const { return available_[ch]; }
  void set_available(std::size_t ch, bool a) { available_[ch] = a; }
  std::size_t num_available() const;

  /// Replace SU `su`'s row.
  void set_row(std::size_t su, const std::vector<double>& bids);

 private:
  std::size_t sus_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
  std::vector<bool> available_;
};

inline constexpr int kUnassigned = -1;

struct Allocation {
  std::vector<int> channel_of;  ///< per SU: 0-based channel or kUnassigned

  bool holds(std::size_t su, std::size_t ch) const {
    return channel_of[su] == static_cast<int>(ch);
  }
  /// z_{ij} view.
  std::vector<std::vector<int>> as_matrix(std::size_t num_channels) const;

  bool operator==(const Allocation&) const = default;
};

struct AuctionOutcome {
  Allocation allocation;
  std::vector<double> taxes;  ///< <= 0
  double welfare = 0.0;
};

enum class SolverPath {
  automatic,    ///< enumeration for small instances, Hungarian otherwise
  enumeration,
  hungarian,
};

/// Exact welfare-maximizing feasible allocation. Every available channel is
/// assigned when there are at least as many SUs as available channels;
/// otherwise every SU gets one. Ties go to the lexicographically smallest
/// assignment vector, with "no channel" ordered before channel 0.
Allocation solve_assignment(const BidMatrix& bids, SolverPath path = SolverPath::automatic);

/// VCG tax of each SU for the given (optimal) allocation.
std::vector<double> compute_taxes(const BidMatrix& bids, const Allocation& allocation);

AuctionOutcome run_auction(const BidMatrix& bids);

/// Exhaustive oracle. Limited to 8 SUs and 6 available channels.
Allocation brute_force_assignment(const BidMatrix& bids);

/// Sum of effective bids (unavailable channels stripped, negatives clamped).
double welfare_of(const BidMatrix& bids, const Allocation& allocation);

/// Bid as the mechanism sees it: 0 on unavailable channels, negatives clamped.
double effective_bid(const BidMatrix& bids, std::size_t su, std::size_t ch);

}  // namespace cogbid::auction
