#pragma once

#include <cstdint>
#include <random>

namespace trackimpute {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent generator for work unit `stream` of a run seeded with `seed`.
/// The result depends only on (seed, stream), never on scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

double standard_normal(Rng& rng);

/// Uniform draw on the open interval (0, 1).
double open_uniform(Rng& rng);

}  // namespace trackimpute
