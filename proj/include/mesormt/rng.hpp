#pragma once
// Counter-based RNG. A key is derived by hashing (seed, stream, i, j), and
// every random quantity in the toolkit is a pure function of its key. Sample
// i of a run always uses stream index i, so worker scheduling can never move
// a draw: runs are reproducible for any worker count.

#include <cstdint>
#include <utility>
#include <cmath>

namespace mesormt {

// splitmix64 finalizer: bijective 64-bit mix with good avalanche.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_key(uint64_t seed, uint64_t stream, uint64_t i, uint64_t j) {
    uint64_t h = seed ^ 0x6A09E667F3BCC909ULL;
    h = mix64(h + 0x9E3779B97F4A7C15ULL * (stream + 1));
    h = mix64(h ^ (0xC2B2AE3D27D4EB4FULL * (i + 1)));
    h = mix64(h ^ (0x165667B19E3779F9ULL * (j + 1)));
    return h;
}

// splitmix64 stream seeded at a derived key.
struct CounterRng {
    uint64_t state;

    explicit CounterRng(uint64_t key) : state(key) {}

    uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ULL;
        return mix64(state);
    }

    // uniform on (0, 1): 53-bit mantissa, offset so 0 is impossible
    double next_uniform() {
        return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Box-Muller pair of independent standard normals
    std::pair<double, double> next_normal_pair() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }
};

} // namespace mesormt
