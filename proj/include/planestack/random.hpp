#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace planestack {

// std::mt19937_64's output sequence is fixed by the standard, unlike the standard
// distributions, so everything below draws raw 64-bit words and maps them itself.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Key of an independent stream derived from a seed and a stream id.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Counter-based uniform in [0, 1): the value depends only on (key, counter).
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept {
    return static_cast<double>(splitmix64(key ^ splitmix64(counter)) >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

double uniform01(Rng& rng);

template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_below(rng, i)]);
    }
}

}  // namespace planestack
