#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace lyap {

using Rng = std::mt19937_64;

/// Independent stream for worker/trial `stream` under `master_seed`. Results
/// depend only on (master_seed, stream), never on scheduling.
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Index i with probability weights[i] / sum(weights). Zero-weight entries are
/// never returned; a draw beyond the rounded total falls on the last positive
/// entry.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

/// Standard normal deviate (Marsaglia polar method on uniform01).
double standard_normal(Rng& rng);

}  // namespace lyap
