// Deterministic per-item random streams.
#pragma once

#include <cstdint>
#include <random>

namespace wedge {

enum class Stream : std::uint32_t { electron = 0, pointer = 1 };

/// Generator keyed by (seed, item index, stream). Draws for item i never
/// depend on how many items were processed before it or on which thread.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

} // namespace wedge
