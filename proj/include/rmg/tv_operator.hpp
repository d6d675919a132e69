#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rmg/errors.hpp"

namespace rmg {

/// Result of the TV-ball inner minimization inf_{P in U^sigma(P0)} P.V.
struct DualResult {
    double value = 0.0;       // the infimum
    double alpha_star = 0.0;  // a maximizing clip level of the dual objective
    std::optional<std::vector<double>> worst_kernel;  // filled by the primal oracle
};

/// Entrywise min(V(s), alpha).
inline std::vector<double> clip(std::span<const double> v, double alpha) {
    std::vector<double> out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) out[s] = std::min(v[s], alpha);
    return out;
}

namespace detail {

inline void check_sigma(double sigma) {
    if (!(sigma >= 0.0 && sigma <= 1.0))
        throw SigmaOutOfRange("TV radius must lie in [0, 1], got " + std::to_string(sigma));
}

}  // namespace detail

/// Exact dual evaluation of the TV robust Bellman inner problem:
///
///   inf_{P in U^sigma(P0)} P.V
///     = max_{alpha in [min V, max V]} { P0.[V]_alpha - sigma (alpha - min_s [V]_alpha(s)) }.
///
/// For alpha >= min V the clipped minimum equals min V, so the objective is
/// piecewise-linear and concave in alpha with breakpoints exactly at the
/// distinct entries of V. The maximum is therefore attained at a breakpoint;
/// we evaluate every distinct entry (the interval endpoints are among them)
/// and keep the best. No iterative search, exact up to rounding.
inline DualResult dual_inf(std::span<const double> p0, std::span<const double> v, double sigma) {
    detail::check_sigma(sigma);
    const std::size_t S = v.size();
    if (p0.size() != S) throw ShapeMismatch("dual_inf: kernel row and value size differ");

    if (sigma == 0.0) {
        double dot = 0.0;
        for (std::size_t s = 0; s < S; ++s) dot += p0[s] * v[s];
        double vmax = *std::max_element(v.begin(), v.end());
        return {dot, vmax, std::nullopt};
    }

    // Order states by value; prefix sums give P0.[V]_alpha at each breakpoint
    // in O(S) after the sort.
    std::vector<int> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)]; });
    const double vmin = v[static_cast<std::size_t>(order.front())];

    double best = -std::numeric_limits<double>::infinity();
    double best_alpha = vmin;
    double mass_below = 0.0;  // sum of p0 over states with V <= current alpha
    double dot_below = 0.0;   // sum of p0*V over those states
    std::size_t k = 0;
    while (k < S) {
        const double alpha = v[static_cast<std::size_t>(order[k])];
        // absorb the whole tie group at this breakpoint
        while (k < S && v[static_cast<std::size_t>(order[k])] == alpha) {
            mass_below += p0[static_cast<std::size_t>(order[k])];
            dot_below += p0[static_cast<std::size_t>(order[k])] * alpha;
            ++k;
        }
        const double objective = dot_below + alpha * (1.0 - mass_below) - sigma * (alpha - vmin);
        if (objective > best) {
            best = objective;
            best_alpha = alpha;
        }
    }
    return {best, best_alpha, std::nullopt};
}

/// Greedy primal oracle for the same minimization: sort states by V
/// descending and move probability mass (capped by each donor's mass,
/// totaling min(sigma, 1 - P0(sink))) onto a fixed lowest-V sink state.
/// Ties: the sink is the smallest-index argmin of V; among equal-V donors
/// mass leaves the largest index first. Returns a row in the TV ball whose
/// inner product with V equals dual_inf(...).value.
inline std::vector<double> worst_case_kernel(std::span<const double> p0, std::span<const double> v,
                                             double sigma) {
    detail::check_sigma(sigma);
    const std::size_t S = v.size();
    if (p0.size() != S) throw ShapeMismatch("worst_case_kernel: kernel row and value size differ");
    std::vector<double> out(p0.begin(), p0.end());
    if (sigma == 0.0 || S <= 1) return out;

    const double vmin = *std::min_element(v.begin(), v.end());
    const double vmax = *std::max_element(v.begin(), v.end());
    if (vmin == vmax) return out;  // value is invariant over the whole ball

    std::size_t sink = 0;
    while (v[sink] != vmin) ++sink;

    std::vector<int> donors;
    donors.reserve(S - 1);
    for (std::size_t s = 0; s < S; ++s)
        if (s != sink) donors.push_back(static_cast<int>(s));
    std::sort(donors.begin(), donors.end(), [&](int a, int b) {
        const double va = v[static_cast<std::size_t>(a)], vb = v[static_cast<std::size_t>(b)];
        if (va != vb) return va > vb;
        return a > b;
    });

    double budget = std::min(sigma, 1.0 - out[sink]);
    double moved = 0.0;
    for (int s : donors) {
        if (budget <= 0.0) break;
        const double take = std::min(out[static_cast<std::size_t>(s)], budget);
        out[static_cast<std::size_t>(s)] -= take;
        moved += take;
        budget -= take;
    }
    out[sink] += moved;
    return out;
}

/// dual_inf with the primal witness attached.
inline DualResult dual_inf_with_kernel(std::span<const double> p0, std::span<const double> v,
                                       double sigma) {
    DualResult r = dual_inf(p0, v, sigma);
    r.worst_kernel = worst_case_kernel(p0, v, sigma);
    return r;
}

}  // namespace rmg
