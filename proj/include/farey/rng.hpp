#pragma once

// Splittable per-trajectory random streams. Each trajectory gets its own
// stream keyed by (seed, trajectory index), so results are bit-identical
// under any worker partitioning.

#include <cstdint>

namespace farey {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Stream for trajectory `index` under master `seed`.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(mix(seed ^ mix(index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    bool next_bit() { return (next_u64() >> 63) != 0; }
};

}  // namespace farey
