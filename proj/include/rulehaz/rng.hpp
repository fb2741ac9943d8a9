#pragma once

#include <cstdint>
#include <random>

namespace rulehaz {

using Engine = std::mt19937_64;

/// Independent generator for (seed, stream, tag). Every consumer of
/// randomness derives its own substream, so the result of a computation never
/// depends on the order in which workers run.
inline Engine substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    return Engine(seq);
}

/// Uniform draw on the open interval (0, 1).
inline double open_uniform(Engine& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = 0.0;
    do {
        u = unif(rng);
    } while (u <= 0.0 || u >= 1.0);
    return u;
}

// Stream tags, one per consumer.
namespace stream_tag {
inline constexpr std::uint64_t boosting = 1;
inline constexpr std::uint64_t folds = 2;
inline constexpr std::uint64_t covariates = 3;
inline constexpr std::uint64_t outcomes = 4;
inline constexpr std::uint64_t oracle = 5;
inline constexpr std::uint64_t replication = 6;
} // namespace stream_tag

} // namespace rulehaz
