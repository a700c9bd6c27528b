#pragma once

#include <cstdint>

namespace lgv {

// splitmix64: tiny, fully deterministic across platforms. Used for every
// seeded start vector and test fixture so reruns are byte-identical.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [-1, 1)
    double next_sym() {
        return 2.0 * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53) - 1.0;
    }
};

} // namespace lgv
