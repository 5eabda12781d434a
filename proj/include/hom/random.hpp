#pragma once

#include <cstdint>
#include <random>

namespace hom {

using Rng = std::mt19937_64;

/// Seeds an independent generator from a master seed and a stream label.
/// Streams with different labels are statistically independent; the mapping
/// is fixed so results do not depend on scheduling.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

// Stream labels used by the simulation harness.
namespace stream {
inline constexpr std::uint64_t drift_a = 1;
inline constexpr std::uint64_t drift_b = 2;
inline constexpr std::uint64_t control_a = 3;
inline constexpr std::uint64_t control_b = 4;
inline constexpr std::uint64_t photons = 5;
inline constexpr std::uint64_t initial_state = 6;
inline constexpr std::uint64_t point_base = 1000;
}  // namespace stream

}  // namespace hom
