#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tfomp {

/// Engine used by every generator in the library.
using Rng = std::mt19937_64;

/// One step of the SplitMix64 sequence; advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Derive an independent stream seed from a master seed and a path of
 * indices, e.g. (grid point, trial). The result depends only on the inputs,
 * never on the order in which streams are requested, so trials can run in
 * any order or on any thread.
 */
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master;
    std::uint64_t seed = splitmix64(state);
    for (std::uint64_t idx : path) {
        state = seed ^ (idx + 0x632BE59BD9B4E019ULL);
        seed = splitmix64(state);
    }
    return seed;
}

inline Rng derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
}

} // namespace tfomp
