#pragma once

#include <cstdint>
#include <vector>

#include "rmg/core.hpp"
#include "rmg/parallel.hpp"

namespace rmg {

namespace rng {

/// SplitMix64 finalizer step.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based stream: a chain of SplitMix64 finalizers over
/// (seed, h, s, a, draw index). Every draw is addressed independently, so
/// generation order (and any parallel split) cannot change the dataset.
inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t h, std::uint64_t s, std::uint64_t a,
                           std::uint64_t k) {
    std::uint64_t x = mix64(seed);
    x = mix64(x + h);
    x = mix64(x + s);
    x = mix64(x + a);
    x = mix64(x + k);
    return x;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace rng

/// Next-state count tallies from the generative model: exactly N draws per
/// (h, s, a) cell, with seed provenance.
struct SampleDataset {
    int horizon = 0;
    int state_count = 0;
    long long joint_actions = 0;
    long long per_cell = 0;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> counts;  // [H][S][A][S']

    std::size_t row_index(int h, int s, long long a) const {
        return static_cast<std::size_t>(((static_cast<long long>(h) * state_count + s) * joint_actions + a) *
                                        state_count);
    }
    std::span<const std::int64_t> row(int h, int s, long long a) const {
        return {counts.data() + row_index(h, s, a), static_cast<std::size_t>(state_count)};
    }
    std::span<std::int64_t> row(int h, int s, long long a) {
        return {counts.data() + row_index(h, s, a), static_cast<std::size_t>(state_count)};
    }

    long long total_samples() const {
        return per_cell * horizon * state_count * joint_actions;
    }
};

/// Draws N i.i.d. categorical samples from every nominal kernel row
/// (non-adaptive, uniform across cells). Parallel generation produces the
/// identical dataset as serial generation.
inline SampleDataset draw(const RobustMarkovGame& game, long long N, std::uint64_t seed,
                          int workers = 1) {
    if (N < 1) throw ValidationError("draw: N must be >= 1");
    SampleDataset d;
    d.horizon = game.horizon;
    d.state_count = game.state_count;
    d.joint_actions = game.joint_actions();
    d.per_cell = N;
    d.seed = seed;
    d.counts.assign(static_cast<std::size_t>(game.horizon) * game.state_count * d.joint_actions *
                        game.state_count,
                    0);
    const long long cells = static_cast<long long>(game.horizon) * game.state_count * d.joint_actions;
    parallel_for(cells, workers, [&](long long c) {
        const long long a = c % d.joint_actions;
        const int s = static_cast<int>((c / d.joint_actions) % game.state_count);
        const int h = static_cast<int>(c / (d.joint_actions * game.state_count));
        const auto p = game.kernel_row(h, s, a);
        auto out = d.row(h, s, a);
        int last_positive = 0;
        for (int sp = 0; sp < game.state_count; ++sp)
            if (p[static_cast<std::size_t>(sp)] > 0.0) last_positive = sp;
        for (long long k = 0; k < N; ++k) {
            const double u = rng::uniform01(rng::keyed(seed, static_cast<std::uint64_t>(h),
                                                       static_cast<std::uint64_t>(s),
                                                       static_cast<std::uint64_t>(a),
                                                       static_cast<std::uint64_t>(k)));
            double cum = 0.0;
            // rounding can leave u past the accumulated row sum; fall back to
            // the last state with positive mass
            int drawn = last_positive;
            for (int sp = 0; sp < game.state_count; ++sp) {
                cum += p[static_cast<std::size_t>(sp)];
                if (u < cum) {
                    drawn = sp;
                    break;
                }
            }
            ++out[static_cast<std::size_t>(drawn)];
        }
    });
    return d;
}

/// The empirical game: the nominal kernel is replaced by counts / N per row;
/// rewards and radii are untouched.
inline RobustMarkovGame empirical_game(const RobustMarkovGame& game, const SampleDataset& d) {
    if (d.horizon != game.horizon || d.state_count != game.state_count ||
        d.joint_actions != game.joint_actions())
        throw ShapeMismatch("dataset shape does not match game");
    if (d.per_cell < 1) throw ShapeMismatch("dataset has no samples");
    RobustMarkovGame out = game;
    const long long cells = static_cast<long long>(game.horizon) * game.state_count * d.joint_actions;
    for (long long c = 0; c < cells; ++c) {
        const long long a = c % d.joint_actions;
        const int s = static_cast<int>((c / d.joint_actions) % game.state_count);
        const int h = static_cast<int>(c / (d.joint_actions * game.state_count));
        const auto cnt = d.row(h, s, a);
        auto row = out.kernel_row(h, s, a);
        std::int64_t sum = 0;
        for (auto v : cnt) sum += v;
        if (sum != d.per_cell) throw ShapeMismatch("dataset row count does not equal N");
        for (int sp = 0; sp < game.state_count; ++sp)
            row[static_cast<std::size_t>(sp)] =
                static_cast<double>(cnt[static_cast<std::size_t>(sp)]) / static_cast<double>(d.per_cell);
    }
    return out;
}

}  // namespace rmg
