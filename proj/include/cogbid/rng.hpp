#pragma once

#include <cstdint>
#include <random>

namespace cogbid {

using Rng = std::mt19937_64;

/// Independent stream derived from a master seed and a stream label.
/// Streams with different labels never share state, so adding or removing
/// one consumer leaves the others' draws untouched.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  return Rng(seq);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cogbid
