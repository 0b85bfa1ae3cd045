#pragma once

// Counter-based seed derivation for reproducible parallel streams.
// Every replication/stream gets its own engine seeded by mixing the
// master seed with a counter through a fixed 64-bit hash, so results
// do not depend on scheduling.

#include <cstdint>
#include <random>

namespace bss {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream `index` derived from `master`. Chaining calls nests sub-streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

} // namespace bss
