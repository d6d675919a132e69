#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rmg/core.hpp"
#include "rmg/sampler.hpp"
#include "rmg/stage_game.hpp"

namespace rmg {

// ---------------------------------------------------------------------------
// Fishing-protection game (two players, 101 states, 2x2 actions).
//
// The environment parameter p drives both the transition (illegal fishing
// advances the punishment count with probability p) and the stage payoffs,
// which after averaging out the next state are state-independent:
//   fisher:  u1(s, 0, .) = -1,          u1(s, 1, .) = -20 p
//   officer: u2(s, 0, 0) = 1, u2(s, 0, 1) = 0,
//            u2(s, 1, 0) = 1, u2(s, 1, 1) = 3 - 2 p.
// Its robust variant perturbs only p inside [p - sigma, p + sigma]; that is a
// parametric uncertainty, not the per-cell TV ball, so the solver below works
// through the game-specific recursions rather than the TV operator.
// ---------------------------------------------------------------------------

inline constexpr int kFishingStates = 101;

inline std::array<double, 8> fishing_stage_payoffs(double p) {
    // joint profile encoding: a = a1 * 2 + a2
    return {
        -1.0, -1.0, -20.0 * p, -20.0 * p,  // agent 1
        1.0, 0.0, 1.0, 3.0 - 2.0 * p,      // agent 2
    };
}

/// Concrete tabular export of the fishing game with the parameter
/// substituted (sigma = 0; the parametric uncertainty has no TV analogue).
inline RobustMarkovGame fishing_game(double p, int horizon) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("fishing_game: p must lie in [0, 1]");
    if (horizon < 1) throw ValidationError("fishing_game: horizon must be >= 1");
    RobustMarkovGame g;
    g.horizon = horizon;
    g.state_count = kFishingStates;
    g.actions = JointActionSpace({2, 2});
    g.sigma = {0.0, 0.0};
    const auto u = fishing_stage_payoffs(p);
    const long long A = 4;
    g.reward.resize(static_cast<std::size_t>(2) * horizon * kFishingStates * A);
    g.kernel.assign(static_cast<std::size_t>(horizon) * kFishingStates * A * kFishingStates, 0.0);
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < kFishingStates; ++s) {
            for (long long a = 0; a < A; ++a) {
                g.reward[g.reward_index(0, h, s, a)] = u[static_cast<std::size_t>(a)];
                g.reward[g.reward_index(1, h, s, a)] = u[static_cast<std::size_t>(4 + a)];
                auto row = g.kernel_row(h, s, a);
                const int a1 = static_cast<int>(a / 2);
                if (a1 == 1 && s < kFishingStates - 1) {
                    row[static_cast<std::size_t>(s + 1)] = p;
                    row[static_cast<std::size_t>(s)] = 1.0 - p;
                } else {
                    row[static_cast<std::size_t>(s)] = 1.0;
                }
            }
        }
    }
    g.reward_min = *std::min_element(g.reward.begin(), g.reward.end());
    g.reward_max = *std::max_element(g.reward.begin(), g.reward.end());
    return g;
}

struct FishingSolution {
    int horizon = 0;
    bool robust = false;
    double p_nominal = 0.0;
    double p_effective = 0.0;  // p + sigma in the robust variant
    // the stage game is state-independent, so one profile and one value pair
    // per step describe every state
    std::vector<std::array<int, 2>> profile;  // [H], (a1, a2) pure NE
    std::vector<double> v1, v2;               // [H], per-agent values at step h

    std::array<int, 2> profile_at(int h, int /*s*/) const {
        return profile[static_cast<std::size_t>(h)];
    }
    double value_at(int agent, int h, int /*s*/) const {
        return agent == 0 ? v1[static_cast<std::size_t>(h)] : v2[static_cast<std::size_t>(h)];
    }
};

/// Backward induction on the fishing recursions. The stage payoffs shift by
/// a per-agent constant across steps (values are state-independent), so each
/// stage NE comes from compute_pure_nash on the stage Q matrices; the NE must
/// be unique at every step or the model assumptions are broken.
///
/// In the robust variant the worst case for both agents' payoffs is p + sigma,
/// so the same recursion runs with the substituted parameter.
inline FishingSolution fishing_solve(double p, int horizon, bool robust, double sigma = 0.0) {
    if (robust && !(sigma >= 0.0)) throw SigmaOutOfRange("fishing_solve: sigma must be >= 0");
    const double pe = robust ? p + sigma : p;
    if (!(pe >= 0.0 && pe <= 1.0))
        throw ValidationError("fishing_solve: effective parameter outside [0, 1]");
    if (horizon < 1) throw ValidationError("fishing_solve: horizon must be >= 1");

    FishingSolution sol;
    sol.horizon = horizon;
    sol.robust = robust;
    sol.p_nominal = p;
    sol.p_effective = pe;
    sol.profile.resize(static_cast<std::size_t>(horizon));
    sol.v1.resize(static_cast<std::size_t>(horizon));
    sol.v2.resize(static_cast<std::size_t>(horizon));

    const auto u = fishing_stage_payoffs(pe);
    double cont1 = 0.0, cont2 = 0.0;
    for (int h = horizon - 1; h >= 0; --h) {
        StageGame stage;
        stage.actions = JointActionSpace({2, 2});
        stage.payoff.resize(8);
        for (long long a = 0; a < 4; ++a) {
            stage.payoff[static_cast<std::size_t>(a)] = u[static_cast<std::size_t>(a)] + cont1;
            stage.payoff[static_cast<std::size_t>(4 + a)] = u[static_cast<std::size_t>(4 + a)] + cont2;
        }
        // count pure equilibria to certify uniqueness
        int found = -1, count = 0;
        for (long long a = 0; a < 4; ++a) {
            bool ok = true;
            for (int i = 0; i < 2 && ok; ++i) {
                const double cur = stage.u(i, a);
                const long long r = stage.actions.encode_excluding(a, i);
                for (int b = 0; b < 2; ++b)
                    if (stage.u(i, stage.actions.compose(r, i, b)) > cur + 1e-12) {
                        ok = false;
                        break;
                    }
            }
            if (ok) {
                ++count;
                if (found < 0) found = static_cast<int>(a);
            }
        }
        if (count != 1)
            throw NonUniqueEquilibrium("fishing stage at h=" + std::to_string(h) + " has " +
                                       std::to_string(count) + " pure equilibria");
        auto pure = compute_pure_nash(stage);
        if (!pure) throw NonUniqueEquilibrium("fishing stage lost its pure equilibrium");
        long long prof = 0;
        while (pure->dist[static_cast<std::size_t>(prof)] == 0.0) ++prof;
        sol.profile[static_cast<std::size_t>(h)] = {static_cast<int>(prof / 2),
                                                    static_cast<int>(prof % 2)};
        cont1 = stage.u(0, prof);
        cont2 = stage.u(1, prof);
        sol.v1[static_cast<std::size_t>(h)] = cont1;
        sol.v2[static_cast<std::size_t>(h)] = cont2;
    }
    return sol;
}

/// Simulates the punishment chain from s = 0 under a constant joint profile;
/// returns the terminal state.
inline int fishing_rollout(double p, int horizon, std::array<int, 2> profile, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("fishing_rollout: p must lie in [0, 1]");
    int s = 0;
    for (int h = 0; h < horizon; ++h) {
        if (profile[0] == 1 && s < kFishingStates - 1) {
            const double u = rng::uniform01(rng::keyed(seed, static_cast<std::uint64_t>(h),
                                                       static_cast<std::uint64_t>(s), 0, 0));
            if (u < p) ++s;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lower-bound hard-instance family (single agent, 2*S*A states, 2 actions).
// ---------------------------------------------------------------------------

/// Binary code with pairwise Hamming distance >= ceil(H/8). theta_h is bit
/// (h-1) of the stored word; words[0] is the all-zeros base vector.
struct ThetaSet {
    int horizon = 0;
    int min_distance = 0;
    std::vector<std::uint64_t> words;

    bool bit(std::size_t idx, int h) const { return (words[idx] >> h) & 1u; }
    std::vector<std::uint8_t> theta(std::size_t idx) const {
        std::vector<std::uint8_t> out(static_cast<std::size_t>(horizon));
        for (int h = 0; h < horizon; ++h) out[static_cast<std::size_t>(h)] = bit(idx, h) ? 1 : 0;
        return out;
    }
};

/// Greedy lexicographic Gilbert-Varshamov construction: scan bit vectors in
/// increasing counter order, keep those at distance >= ceil(H/8) from all
/// kept vectors, and stop once the size bound ceil(e^{H/8}) is met. The
/// all-zeros vector is always the first element.
inline ThetaSet build_theta_set(int horizon) {
    if (horizon < 16) throw ValidationError("build_theta_set: needs H >= 16");
    if (horizon > 63) throw ValidationError("build_theta_set: H > 63 not supported");
    ThetaSet ts;
    ts.horizon = horizon;
    ts.min_distance = (horizon + 7) / 8;
    const auto target =
        static_cast<std::size_t>(std::ceil(std::exp(static_cast<double>(horizon) / 8.0)));
    const std::uint64_t limit = horizon == 63 ? ~0ull : (1ull << horizon) - 1;
    for (std::uint64_t cand = 0;; ++cand) {
        bool ok = true;
        for (std::uint64_t kept : ts.words) {
            if (std::popcount(cand ^ kept) < ts.min_distance) {
                ok = false;
                break;
            }
        }
        if (ok) ts.words.push_back(cand);
        if (ts.words.size() >= target) break;
        if (cand == limit) break;
    }
    if (ts.words.size() < target)
        throw ConstructionFailed("build_theta_set: greedy produced " +
                                 std::to_string(ts.words.size()) + " of " +
                                 std::to_string(target) + " codewords");
    return ts;
}

/// Parameters of one hard instance M_w^theta. S, A, H size the family (the
/// built chain has 2 S A states and 2 actions); p, delta, q follow the
/// sigma-regime schedule and are filled in by finalize().
struct HardInstanceSpec {
    int S = 2;
    int A = 2;
    int H = 16;
    double sigma = 0.1;
    double eps = 0.25;
    double c0 = 0.25;
    double c1 = 0.125;  // must equal c0 / 2
    double c2 = 0.25;
    double c5 = 0.125;
    int w = 0;
    std::vector<std::uint8_t> theta;  // member of Theta*, theta[h] for step h

    // derived by finalize()
    double p = 0.0;
    double delta = 0.0;
    double q = 0.0;

    bool low_sigma_branch() const { return sigma <= c2 / (2.0 * H); }
};

/// Computes p, delta, q from the sigma-regime branch and re-checks every
/// constraint the construction relies on.
inline HardInstanceSpec finalize(HardInstanceSpec spec) {
    if (spec.S < 1 || spec.A < 1 || spec.H < 2)
        throw ParameterRegimeViolation("hard instance needs S, A >= 1 and H >= 2");
    if (!(spec.c0 > 0.0 && spec.c0 <= 0.25))
        throw ParameterRegimeViolation("c0 must lie in (0, 1/4]");
    if (std::abs(spec.c1 - spec.c0 / 2.0) > 1e-12)
        throw ParameterRegimeViolation("c1 must equal c0 / 2");
    if (!(spec.c2 > 0.0 && spec.c2 <= 0.25))
        throw ParameterRegimeViolation("c2 must lie in (0, 1/4]");
    if (!(spec.c5 > 0.0)) throw ParameterRegimeViolation("c5 must be positive");
    if (!(spec.sigma > 0.0 && spec.sigma <= 1.0 - spec.c0))
        throw ParameterRegimeViolation("sigma must lie in (0, 1 - c0]");
    if (spec.w < 0 || spec.w >= spec.S * spec.A)
        throw ParameterRegimeViolation("w must index into {0, ..., SA-1}");
    if (static_cast<int>(spec.theta.size()) != spec.H)
        throw ParameterRegimeViolation("theta must have one bit per step");
    bool all_zero = true;
    for (auto b : spec.theta)
        if (b) all_zero = false;
    if (all_zero) throw ParameterRegimeViolation("theta must differ from the all-zeros base");

    const double H = spec.H;
    if (spec.low_sigma_branch()) {
        if (!(spec.eps <= spec.c2 / H))
            throw ParameterRegimeViolation("low-sigma branch requires eps <= c2 / H");
        spec.p = spec.c2 / H;
        spec.delta = spec.c5 * spec.eps / (H * H);
        if (spec.delta > spec.c2 / (2.0 * H))
            throw ParameterRegimeViolation("delta exceeds the low-sigma cap c2 / (2H)");
    } else {
        if (!(spec.eps <= 1.0))
            throw ParameterRegimeViolation("high-sigma branch requires eps <= 1");
        spec.p = (1.0 + spec.c1 / H) * spec.sigma;
        spec.delta = spec.c5 * spec.sigma * spec.eps / H;
        if (spec.delta > spec.c1 * spec.sigma / H)
            throw ParameterRegimeViolation("delta exceeds the high-sigma cap c1 sigma / H");
    }
    spec.q = spec.p - spec.delta;
    if (!(spec.q >= 0.0 && spec.q <= spec.p && spec.p + spec.delta <= 1.0))
        throw ParameterRegimeViolation("require 0 <= q <= p <= p + delta <= 1");
    if (spec.q < std::max(spec.c2 / (2.0 * H), spec.sigma) - 1e-15)
        throw ParameterRegimeViolation("require q >= max(c2 / 2H, sigma)");
    return spec;
}

/// State layout of the built chain: x_i is state i, y_i is state W + i, with
/// W = S * A.
inline int hard_state_x(const HardInstanceSpec& spec, int i) { (void)spec; return i; }
inline int hard_state_y(const HardInstanceSpec& spec, int i) { return spec.S * spec.A + i; }

/// Builds the single-agent RMG M_w^theta: X states drain into their Y partner
/// at rate p + delta (base action) or p elsewhere, the distinguished x_w uses
/// (p, q) keyed by theta_h, Y states self-loop with reward 1.
inline RobustMarkovGame build_hard_rmdp(const HardInstanceSpec& raw) {
    const HardInstanceSpec spec = finalize(raw);
    const int W = spec.S * spec.A;
    const int SS = 2 * W;
    RobustMarkovGame g;
    g.horizon = spec.H;
    g.state_count = SS;
    g.actions = JointActionSpace({2});
    g.sigma = {spec.sigma};
    g.reward_min = 0.0;
    g.reward_max = 1.0;
    g.reward.assign(static_cast<std::size_t>(1) * spec.H * SS * 2, 0.0);
    g.kernel.assign(static_cast<std::size_t>(spec.H) * SS * 2 * SS, 0.0);
    for (int h = 0; h < spec.H; ++h) {
        const int theta_h = spec.theta[static_cast<std::size_t>(h)] ? 1 : 0;
        for (int s = 0; s < SS; ++s) {
            for (long long a = 0; a < 2; ++a) {
                auto row = g.kernel_row(h, s, a);
                if (s >= W) {  // Y states: absorbing, reward 1 for both actions
                    row[static_cast<std::size_t>(s)] = 1.0;
                    g.reward[g.reward_index(0, h, s, a)] = 1.0;
                    continue;
                }
                const int y = W + s;
                double up;
                if (s == spec.w) {
                    up = (a == theta_h) ? spec.p : spec.q;
                } else {
                    up = (a == 0) ? spec.p + spec.delta : spec.p;  // theta_base is all zeros
                }
                row[static_cast<std::size_t>(y)] = up;
                row[static_cast<std::size_t>(s)] = 1.0 - up;
            }
        }
    }
    return g;
}

struct HardClosedForm {
    std::vector<int> action;    // [H][2W] optimal action; Y states pinned to 0
    std::vector<double> gap_h;  // [H], V*_h(y_w) - V*_h(x_w) = sum_{j=0}^{H-h-1} (1-p)^j
    double value_x_w = 0.0;     // V*_1(x_w)
    double value_y_w = 0.0;     // V*_1(y_w)
};

/// Closed form for the built instance: the optimal policy plays theta_h at
/// x_w and the base action elsewhere in X (at the terminal step and on Y
/// states every action is optimal; those entries are pinned to the stated
/// choices), and the x->y value gap is a geometric sum in 1 - p.
inline HardClosedForm hard_rmdp_closed_form(const HardInstanceSpec& raw) {
    const HardInstanceSpec spec = finalize(raw);
    const int W = spec.S * spec.A;
    const int SS = 2 * W;
    HardClosedForm cf;
    cf.action.assign(static_cast<std::size_t>(spec.H) * SS, 0);
    cf.gap_h.resize(static_cast<std::size_t>(spec.H));
    for (int h = 0; h < spec.H; ++h) {
        for (int s = 0; s < W; ++s)
            cf.action[static_cast<std::size_t>(h) * SS + s] =
                (s == spec.w) ? (spec.theta[static_cast<std::size_t>(h)] ? 1 : 0) : 0;
        double gap = 0.0, pw = 1.0;
        for (int j = 0; j <= spec.H - 1 - h; ++j) {
            gap += pw;
            pw *= 1.0 - spec.p;
        }
        cf.gap_h[static_cast<std::size_t>(h)] = gap;
    }
    // forward recursions for the optimal values at the pair (x_w, y_w):
    //   V_h(x_w) = (p - sigma) V_{h+1}(y_w) + (1 - p + sigma) V_{h+1}(x_w)
    //   V_h(y_w) = 1 + (1 - sigma) V_{h+1}(y_w) + sigma V_{h+1}(x_w)
    double vx = 0.0, vy = 0.0;
    const double pl = spec.p - spec.sigma;
    for (int h = spec.H - 1; h >= 0; --h) {
        const double nx = pl * vy + (1.0 - pl) * vx;
        const double ny = 1.0 + (1.0 - spec.sigma) * vy + spec.sigma * vx;
        vx = nx;
        vy = ny;
    }
    cf.value_x_w = vx;
    cf.value_y_w = vy;
    return cf;
}

}  // namespace rmg
