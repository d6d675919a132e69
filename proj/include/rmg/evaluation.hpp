#pragma once

#include <algorithm>
#include <vector>

#include "rmg/core.hpp"
#include "rmg/parallel.hpp"
#include "rmg/tv_operator.hpp"

namespace rmg {

/// Robust policy evaluation by backward induction:
///   V[i][h][s] = sum_a pi[h][s][a] ( r[i][h][s][a] + inf_{P in U^sigma_i} P V[i][h+1] ).
inline ValueTensor robust_policy_eval(const RobustMarkovGame& game, const JointPolicy& pi,
                                      int workers = 1) {
    check_compatible(game, pi);
    const int n = game.agent_count();
    const int H = game.horizon;
    const int S = game.state_count;
    const long long A = game.joint_actions();
    ValueTensor v(n, H, S);
    for (int h = H - 1; h >= 0; --h) {
        parallel_for(static_cast<long long>(n) * S, workers, [&](long long k) {
            const int s = static_cast<int>(k % S);
            const int i = static_cast<int>(k / S);
            const auto vnext = v.slice(i, h + 1);
            const auto prow = pi.row(h, s);
            double acc = 0.0;
            for (long long a = 0; a < A; ++a) {
                const double p = prow[static_cast<std::size_t>(a)];
                if (p == 0.0) continue;
                acc += p * (game.r(i, h, s, a) +
                            dual_inf(game.kernel_row(h, s, a), vnext,
                                     game.sigma[static_cast<std::size_t>(i)]).value);
            }
            v.at(i, h, s) = acc;
        });
    }
    return v;
}

struct BestResponse {
    int agent = 0;
    std::vector<int> action;  // [H][S], deterministic best response a_i
    ValueTensor value;        // value tensor for the deviating agent only (agent slot 0)
};

/// Robust best response of one agent against the others' marginal play:
/// the deviator observes neither the correlation device nor the realized
/// profile, so opponents enter through marginal_excluding.
inline BestResponse robust_best_response(const RobustMarkovGame& game, const JointPolicy& pi,
                                         int agent, int workers = 1) {
    check_compatible(game, pi);
    const int H = game.horizon;
    const int S = game.state_count;
    const int Ai = game.actions.size(agent);
    const long long Am = game.joint_actions() / Ai;
    const double sigma = game.sigma[static_cast<std::size_t>(agent)];

    BestResponse br;
    br.agent = agent;
    br.action.assign(static_cast<std::size_t>(H) * S, 0);
    br.value = ValueTensor(1, H, S);

    for (int h = H - 1; h >= 0; --h) {
        parallel_for(S, workers, [&](long long sk) {
            const int s = static_cast<int>(sk);
            const auto vnext = br.value.slice(0, h + 1);
            const std::vector<double> m = marginal_excluding(pi, h, s, agent);
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int b = 0; b < Ai; ++b) {
                double acc = 0.0;
                for (long long r = 0; r < Am; ++r) {
                    const double w = m[static_cast<std::size_t>(r)];
                    if (w == 0.0) continue;
                    const long long a = game.actions.compose(r, agent, b);
                    acc += w * (game.r(agent, h, s, a) +
                                dual_inf(game.kernel_row(h, s, a), vnext, sigma).value);
                }
                if (acc > best) {
                    best = acc;
                    best_a = b;
                }
            }
            br.value.at(0, h, s) = best;
            br.action[static_cast<std::size_t>(h) * S + s] = best_a;
        });
    }
    return br;
}

struct StrategyModification {
    int agent = 0;
    std::vector<int> swap;  // [H][S][A_i], f(a_i) per stage; identity off-support
    ValueTensor value;      // modified-policy value for the agent (agent slot 0)
};

/// Best strategy modification f_i: per (h, s) and recommended action a_i,
/// pick the swap b maximizing the robust continuation; choices at distinct
/// (h, s) decouple given the continuation value, so one backward pass is
/// exact. Zero-marginal recommendations keep the identity swap.
inline StrategyModification best_strategy_modification(const RobustMarkovGame& game,
                                                       const JointPolicy& pi, int agent,
                                                       int workers = 1) {
    check_compatible(game, pi);
    const int H = game.horizon;
    const int S = game.state_count;
    const int Ai = game.actions.size(agent);
    const long long Am = game.joint_actions() / Ai;
    const double sigma = game.sigma[static_cast<std::size_t>(agent)];

    StrategyModification sm;
    sm.agent = agent;
    sm.swap.assign(static_cast<std::size_t>(H) * S * Ai, 0);
    sm.value = ValueTensor(1, H, S);

    for (int h = H - 1; h >= 0; --h) {
        parallel_for(S, workers, [&](long long sk) {
            const int s = static_cast<int>(sk);
            const auto vnext = sm.value.slice(0, h + 1);
            const auto prow = pi.row(h, s);
            double total = 0.0;
            for (int ai = 0; ai < Ai; ++ai) {
                int* slot = &sm.swap[(static_cast<std::size_t>(h) * S + s) * Ai + ai];
                *slot = ai;
                // weights: joint mass of (a_i = ai, a_-i = r)
                double mass = 0.0;
                for (long long r = 0; r < Am; ++r)
                    mass += prow[static_cast<std::size_t>(game.actions.compose(r, agent, ai))];
                if (mass == 0.0) continue;
                double best = -std::numeric_limits<double>::infinity();
                int best_b = 0;
                for (int b = 0; b < Ai; ++b) {
                    double acc = 0.0;
                    for (long long r = 0; r < Am; ++r) {
                        const double w =
                            prow[static_cast<std::size_t>(game.actions.compose(r, agent, ai))];
                        if (w == 0.0) continue;
                        const long long ab = game.actions.compose(r, agent, b);
                        acc += w * (game.r(agent, h, s, ab) +
                                    dual_inf(game.kernel_row(h, s, ab), vnext, sigma).value);
                    }
                    if (acc > best) {
                        best = acc;
                        best_b = b;
                    }
                }
                *slot = best_b;
                total += best;
            }
            sm.value.at(0, h, s) = total;
        });
    }
    return sm;
}

namespace detail {

inline double first_step_gap(const RobustMarkovGame& game, const JointPolicy& pi,
                             const ValueTensor& base, bool use_modification, int workers) {
    double worst = 0.0;
    for (int i = 0; i < game.agent_count(); ++i) {
        const ValueTensor dev = use_modification
                                    ? best_strategy_modification(game, pi, i, workers).value
                                    : robust_best_response(game, pi, i, workers).value;
        for (int s = 0; s < game.state_count; ++s)
            worst = std::max(worst, dev.at(0, 0, s) - base.at(i, 0, s));
    }
    return std::max(worst, 0.0);  // absorbs -1e-15 rounding
}

}  // namespace detail

/// gap_CCE(pi) = max_{i,s} [ V*_{i,1}(s) - V^pi_{i,1}(s) ], clamped at zero.
inline double gap_cce(const RobustMarkovGame& game, const JointPolicy& pi, int workers = 1) {
    const ValueTensor base = robust_policy_eval(game, pi, workers);
    return detail::first_step_gap(game, pi, base, false, workers);
}

/// Same quantity on a product policy.
inline double gap_ne(const RobustMarkovGame& game, const JointPolicy& pi, int workers = 1) {
    if (pi.kind != PolicyKind::Product)
        throw NotProductDistribution("gap_ne requires a product policy");
    return gap_cce(game, pi, workers);
}

/// gap_CE(pi) with best strategy modifications as the deviation class.
inline double gap_ce(const RobustMarkovGame& game, const JointPolicy& pi, int workers = 1) {
    const ValueTensor base = robust_policy_eval(game, pi, workers);
    return detail::first_step_gap(game, pi, base, true, workers);
}

inline double gap_of_kind(const RobustMarkovGame& game, const JointPolicy& pi, EqKind kind,
                          int workers = 1) {
    switch (kind) {
        case EqKind::Nash: return gap_ne(game, pi, workers);
        case EqKind::CCE: return gap_cce(game, pi, workers);
        case EqKind::CE: return gap_ce(game, pi, workers);
    }
    throw NumericalFailure("gap_of_kind: bad kind");
}

}  // namespace rmg
