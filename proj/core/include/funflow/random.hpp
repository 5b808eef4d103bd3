#pragma once

#include <cstdint>
#include <random>

namespace funflow {

/// All simulation draws come from this engine.
using Rng = std::mt19937_64;

/// Independent, reproducible stream for (seed, stream index). Replication r of a
/// study always uses make_stream(seed, r), whatever order replications run in.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x66756e66u};
    return Rng(seq);
}

}  // namespace funflow
