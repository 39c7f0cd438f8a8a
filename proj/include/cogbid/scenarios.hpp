#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cogbid/sim.hpp"

namespace cogbid::sim {

/// Defaults shared by the built-in scenarios and the config parser.
struct Defaults {
  static constexpr double kSlotLen = 0.01;
  static constexpr double kArrivalBitsPerSecond = 2e6;
  static constexpr int kPacketBytes = 1000;
  static constexpr int kBufferCapacity = 10;
  static constexpr double kDiscount = 0.8;
  static constexpr int kClasses = 5;
  static constexpr int kHorizon = 20000;
  static constexpr int kWindow = 1000;
  static inline const std::vector<int> kPacketsPerSlot{1, 2, 3};
  static inline const std::vector<double> kSnrDb{18.0, 23.0, 26.0};
  static inline const std::vector<double> kEntry{0.4, 0.4, 0.2};
};

/// Arrival rate in packets/second for a bit rate and packet size.
double packets_per_second(double bits_per_second, int packet_bytes);

/// Channel with the shared SNR chain of the built-in experiments.
env::ChannelModel default_channel(double p_nf, double p_fn);

/// SU with the built-in traffic, buffer and rate table.
SuConfig default_su(strategies::Policy policy, double slot_len = Defaults::kSlotLen);

/// Named catalog, in presentation order. Defaults are resolved.
const std::vector<ScenarioConfig>& builtin_scenarios();

/// Exact name, or every scenario whose name starts with `selector`.
std::vector<ScenarioConfig> select_scenarios(std::string_view selector);

}  // namespace cogbid::sim
