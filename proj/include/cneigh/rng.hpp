#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cneigh {

/// Roles that key independent random streams inside one replication, so
/// that every estimator sees the same design, path and noise draws.
enum class StreamRole : std::uint64_t {
    Design = 1,
    Path = 2,
    Noise = 3,
    Subsample = 4,
    Volume = 5,
    Auxiliary = 6,
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives the seed of the stream identified by (seed, key...). Streams with
/// different keys are statistically independent; the derivation is a pure
/// function so any stream can be regenerated out of order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t h = mix64(seed);
    for (std::uint64_t k : keys)
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    return Rng(stream_seed(seed, keys));
}

inline Rng make_stream(std::uint64_t seed, StreamRole role, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return make_stream(seed, {static_cast<std::uint64_t>(role), a, b});
}

/// Uniform double in [0, 1) from the top 53 bits; identical across standard
/// library implementations, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace cneigh
