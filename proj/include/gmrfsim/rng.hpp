#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gmrfsim {

// Counter-based generation: deviate i of stream s under seed q is a pure
// function of (q, s, i), so replicates can be generated in any order or in
// parallel with bit-identical results.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ (stream * 0x632BE59BD9B4E019ULL + 0x9E3779B97F4A7C15ULL));
}

// i-th output of the keyed counter sequence.
inline std::uint64_t counter_u64(std::uint64_t key, std::uint64_t i) {
    return mix64(key + i * 0x9E3779B97F4A7C15ULL);
}

} // namespace detail

/// n independent standard normal deviates, Box-Muller over the counter
/// sequence. Deterministic for (seed, stream); distinct streams independent.
inline std::vector<double> standard_normal_vector(std::uint64_t seed, std::uint64_t stream,
                                                  std::size_t n) {
    std::vector<double> out(n);
    const std::uint64_t key = detail::stream_key(seed, stream);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t pair = 0; 2 * pair < n; ++pair) {
        std::uint64_t r1 = detail::counter_u64(key, 2 * pair);
        std::uint64_t r2 = detail::counter_u64(key, 2 * pair + 1);
        // u1 in (0,1] so log is finite; u2 in [0,1)
        double u1 = (static_cast<double>(r1 >> 11) + 1.0) * 0x1.0p-53;
        double u2 = static_cast<double>(r2 >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        out[2 * pair] = r * std::cos(two_pi * u2);
        if (2 * pair + 1 < n) out[2 * pair + 1] = r * std::sin(two_pi * u2);
    }
    return out;
}

} // namespace gmrfsim
