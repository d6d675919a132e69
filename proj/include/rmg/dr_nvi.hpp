#pragma once

#include <vector>

#include "rmg/core.hpp"
#include "rmg/parallel.hpp"
#include "rmg/stage_game.hpp"
#include "rmg/tv_operator.hpp"

namespace rmg {

struct DrNviResult {
    QTensor q;            // robust Q estimates, [n][H][S][A]
    ValueTensor v;        // [n][H+1][S], last step identically zero
    JointPolicy policy;   // product for Nash, correlated otherwise
    std::vector<double> stage_gap;  // [H][S] certified equilibrium gap per stage solve
    std::vector<long> stage_iters;  // [H][S] learner iterations per stage solve
};

/// Robust equilibrium value iteration: backward induction where each
/// (agent, state, action) cell applies the TV dual operator to the next-step
/// value and each state solves the stage game of robust Q rows with the
/// requested equilibrium subroutine.
///
/// Within one step the dual evaluations and per-state solves are
/// data-parallel; `workers` controls the thread count and any value yields
/// results identical to the serial order (i, then s, then a ascending).
inline DrNviResult dr_nvi(const RobustMarkovGame& game, EqKind kind, double sub_tol,
                          int workers = 1, long max_iters = kDefaultEqMaxIters) {
    validate(game);
    const int n = game.agent_count();
    const int H = game.horizon;
    const int S = game.state_count;
    const long long A = game.joint_actions();

    DrNviResult out;
    out.q = QTensor(n, H, S, A);
    out.v = ValueTensor(n, H, S);
    out.policy.horizon = H;
    out.policy.state_count = S;
    out.policy.actions = game.actions;
    out.policy.kind = kind == EqKind::Nash ? PolicyKind::Product : PolicyKind::Correlated;
    out.policy.dist.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.stage_gap.assign(static_cast<std::size_t>(H) * S, 0.0);
    out.stage_iters.assign(static_cast<std::size_t>(H) * S, 0);

    for (int h = H - 1; h >= 0; --h) {
        parallel_for(static_cast<long long>(n) * S * A, workers, [&](long long k) {
            const long long a = k % A;
            const int s = static_cast<int>((k / A) % S);
            const int i = static_cast<int>(k / (A * S));
            const auto vnext = out.v.slice(i, h + 1);
            out.q.at(i, h, s, a) =
                game.r(i, h, s, a) +
                dual_inf(game.kernel_row(h, s, a), vnext, game.sigma[static_cast<std::size_t>(i)]).value;
        });
        parallel_for(S, workers, [&](long long sk) {
            const int s = static_cast<int>(sk);
            StageGame stage;
            stage.actions = game.actions;
            stage.payoff.resize(static_cast<std::size_t>(n) * A);
            for (int i = 0; i < n; ++i) {
                auto row = out.q.row(i, h, s);
                std::copy(row.begin(), row.end(),
                          stage.payoff.begin() + static_cast<std::ptrdiff_t>(i) * A);
            }
            EquilibriumSolution sol = compute_equilibrium(stage, kind, sub_tol, max_iters);
            auto prow = out.policy.row(h, s);
            std::copy(sol.dist.begin(), sol.dist.end(), prow.begin());
            out.stage_gap[static_cast<std::size_t>(h) * S + s] = sol.certified_gap;
            out.stage_iters[static_cast<std::size_t>(h) * S + s] = sol.iterations;
            for (int i = 0; i < n; ++i) {
                double v = 0.0;
                for (long long a = 0; a < A; ++a)
                    v += sol.dist[static_cast<std::size_t>(a)] * out.q.at(i, h, s, a);
                out.v.at(i, h, s) = v;
            }
        });
    }
    return out;
}

}  // namespace rmg
