// Counter-based random streams. Every draw is a pure function of
// (seed, stream, agent, step, draw), so results do not depend on scheduling
// or worker count.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mfd::rng {

enum class Stream : std::uint64_t {
    AgentInit = 1,
    AgentStep = 2,
    ReportSelection = 3,
    TestNoise = 4,
};

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, Stream stream, std::uint64_t agent,
                            std::uint64_t step, std::uint64_t draw) {
    std::uint64_t h = split_mix(seed ^ 0x6A09E667F3BCC909ULL);
    h = split_mix(h ^ static_cast<std::uint64_t>(stream));
    h = split_mix(h ^ agent);
    h = split_mix(h ^ step);
    return split_mix(h ^ draw);
}

// Uniform double in the open interval (0, 1).
inline double uniform01(std::uint64_t seed, Stream stream, std::uint64_t agent,
                        std::uint64_t step, std::uint64_t draw) {
    const std::uint64_t bits = key(seed, stream, agent, step, draw) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Pair of independent standard normals (Box-Muller from two uniforms).
inline void normal_pair(std::uint64_t seed, Stream stream, std::uint64_t agent,
                        std::uint64_t step, std::uint64_t pair_index,
                        double& z0, double& z1) {
    const double u1 = uniform01(seed, stream, agent, step, 2 * pair_index);
    const double u2 = uniform01(seed, stream, agent, step, 2 * pair_index + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
}

}  // namespace mfd::rng
