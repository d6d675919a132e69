#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rmg/errors.hpp"

namespace rmg {

// Probability tolerances used throughout: 1e-12 when constructing or
// validating distributions, 1e-10 for quantities derived from them.
inline constexpr double kProbTolConstruct = 1e-12;
inline constexpr double kProbTolDerived = 1e-10;

/// Mixed-radix encoding of joint action profiles. Agent 0 is the most
/// significant digit, so profile (a_0, ..., a_{n-1}) encodes to
/// ((a_0 * A_1 + a_1) * A_2 + ...). The encoding is part of the file
/// format contract.
class JointActionSpace {
  public:
    JointActionSpace() = default;

    explicit JointActionSpace(std::vector<int> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.empty()) throw ShapeMismatch("joint action space needs at least one agent");
        place_.resize(sizes_.size());
        long long t = 1;
        for (int i = static_cast<int>(sizes_.size()) - 1; i >= 0; --i) {
            if (sizes_[static_cast<std::size_t>(i)] <= 0)
                throw ShapeMismatch("action space sizes must be positive");
            place_[static_cast<std::size_t>(i)] = t;
            t *= sizes_[static_cast<std::size_t>(i)];
        }
        total_ = t;
    }

    int agent_count() const { return static_cast<int>(sizes_.size()); }
    int size(int agent) const { return sizes_[static_cast<std::size_t>(agent)]; }
    const std::vector<int>& sizes() const { return sizes_; }
    long long total() const { return total_; }

    long long encode(std::span<const int> profile) const {
        long long code = 0;
        for (int i = 0; i < agent_count(); ++i)
            code += static_cast<long long>(profile[static_cast<std::size_t>(i)]) *
                    place_[static_cast<std::size_t>(i)];
        return code;
    }

    void decode(long long code, std::span<int> out) const {
        for (int i = 0; i < agent_count(); ++i) {
            out[static_cast<std::size_t>(i)] =
                static_cast<int>((code / place_[static_cast<std::size_t>(i)]) %
                                 sizes_[static_cast<std::size_t>(i)]);
        }
    }

    std::vector<int> decode(long long code) const {
        std::vector<int> out(static_cast<std::size_t>(agent_count()));
        decode(code, out);
        return out;
    }

    /// Coordinate of one agent inside an encoded profile.
    int action_of(long long code, int agent) const {
        return static_cast<int>((code / place_[static_cast<std::size_t>(agent)]) %
                                sizes_[static_cast<std::size_t>(agent)]);
    }

    /// The reduced space over all agents except `agent`, same digit order.
    JointActionSpace excluding(int agent) const {
        std::vector<int> s;
        s.reserve(sizes_.size() - 1);
        for (int j = 0; j < agent_count(); ++j)
            if (j != agent) s.push_back(sizes_[static_cast<std::size_t>(j)]);
        if (s.empty()) s.push_back(1);  // single-agent game: A_{-i} is a singleton
        return JointActionSpace(std::move(s));
    }

    /// Encoded profile over agents != agent, digits in ascending agent order.
    long long encode_excluding(long long code, int agent) const {
        const long long p = place_[static_cast<std::size_t>(agent)];
        const long long sz = sizes_[static_cast<std::size_t>(agent)];
        return (code / (p * sz)) * p + code % p;
    }

    /// Inverse of encode_excluding: insert action b for `agent` into a
    /// reduced code.
    long long compose(long long reduced, int agent, int b) const {
        const long long p = place_[static_cast<std::size_t>(agent)];
        const long long sz = sizes_[static_cast<std::size_t>(agent)];
        return (reduced / p * sz + b) * p + reduced % p;
    }

    bool operator==(const JointActionSpace& o) const { return sizes_ == o.sizes_; }

  private:
    std::vector<int> sizes_;
    std::vector<long long> place_;
    long long total_ = 0;
};

/// Tabular robust Markov game. Rewards are deterministic per
/// (agent, step, state, joint action); the nominal kernel is row-stochastic
/// per (step, state, joint action); each agent carries its own TV radius.
/// All data is immutable after construction, so any operation may run
/// concurrently on shared game objects.
struct RobustMarkovGame {
    int horizon = 0;      // H >= 1; step index h is 0-based internally
    int state_count = 0;  // S
    JointActionSpace actions;
    std::vector<double> reward;  // [n][H][S][A] flattened
    std::vector<double> kernel;  // [H][S][A][S'] flattened
    std::vector<double> sigma;   // per-agent TV radius in [0, 1]
    double reward_min = 0.0;
    double reward_max = 1.0;

    int agent_count() const { return actions.agent_count(); }
    long long joint_actions() const { return actions.total(); }

    /// True iff the declared reward range is exactly [0, 1]; the value-span
    /// bound only applies to such games.
    bool normalized() const { return reward_min == 0.0 && reward_max == 1.0; }

    std::size_t reward_index(int i, int h, int s, long long a) const {
        const long long A = actions.total();
        return static_cast<std::size_t>(((static_cast<long long>(i) * horizon + h) * state_count + s) * A + a);
    }
    double r(int i, int h, int s, long long a) const { return reward[reward_index(i, h, s, a)]; }

    std::size_t kernel_row_index(int h, int s, long long a) const {
        const long long A = actions.total();
        return static_cast<std::size_t>(((static_cast<long long>(h) * state_count + s) * A + a) * state_count);
    }
    std::span<const double> kernel_row(int h, int s, long long a) const {
        return {kernel.data() + kernel_row_index(h, s, a), static_cast<std::size_t>(state_count)};
    }
    std::span<double> kernel_row(int h, int s, long long a) {
        return {kernel.data() + kernel_row_index(h, s, a), static_cast<std::size_t>(state_count)};
    }
};

/// Checks all RobustMarkovGame invariants; throws on the first violation.
inline void validate(const RobustMarkovGame& g) {
    if (g.horizon < 1) throw ShapeMismatch("horizon must be >= 1");
    if (g.state_count < 1) throw ShapeMismatch("state_count must be >= 1");
    const long long A = g.actions.total();
    const int n = g.agent_count();
    if (static_cast<long long>(g.sigma.size()) != n)
        throw ShapeMismatch("sigma must have one entry per agent");
    const std::size_t want_r = static_cast<std::size_t>(n) * g.horizon * g.state_count * A;
    const std::size_t want_k =
        static_cast<std::size_t>(g.horizon) * g.state_count * A * g.state_count;
    if (g.reward.size() != want_r) throw ShapeMismatch("reward tensor has wrong size");
    if (g.kernel.size() != want_k) throw ShapeMismatch("kernel tensor has wrong size");
    for (double s : g.sigma) {
        if (!(s >= 0.0 && s <= 1.0))
            throw SigmaOutOfRange("sigma must lie in [0, 1], got " + std::to_string(s));
    }
    if (!(g.reward_min <= g.reward_max)) throw RewardOutOfRange("reward_range is empty");
    for (int h = 0; h < g.horizon; ++h) {
        for (int s = 0; s < g.state_count; ++s) {
            for (long long a = 0; a < A; ++a) {
                auto row = g.kernel_row(h, s, a);
                double sum = 0.0;
                for (double p : row) {
                    if (p < 0.0) throw NonStochasticRow(h, s, static_cast<int>(a), p);
                    sum += p;
                }
                if (std::abs(sum - 1.0) > kProbTolConstruct)
                    throw NonStochasticRow(h, s, static_cast<int>(a), sum);
            }
        }
    }
    for (double v : g.reward) {
        if (!(v >= g.reward_min - 1e-15 && v <= g.reward_max + 1e-15) || !std::isfinite(v))
            throw RewardOutOfRange("reward " + std::to_string(v) + " outside declared range");
    }
}

enum class PolicyKind { Product, Correlated };

/// Joint Markov policy: one distribution over encoded joint profiles per
/// (step, state). Product policies must factor into per-agent marginals.
struct JointPolicy {
    int horizon = 0;
    int state_count = 0;
    JointActionSpace actions;
    PolicyKind kind = PolicyKind::Correlated;
    std::vector<double> dist;  // [H][S][A]

    std::size_t row_index(int h, int s) const {
        return static_cast<std::size_t>((static_cast<long long>(h) * state_count + s) *
                                        actions.total());
    }
    std::span<const double> row(int h, int s) const {
        return {dist.data() + row_index(h, s), static_cast<std::size_t>(actions.total())};
    }
    std::span<double> row(int h, int s) {
        return {dist.data() + row_index(h, s), static_cast<std::size_t>(actions.total())};
    }
};

/// Marginal of a joint distribution for one agent.
inline std::vector<double> marginal_of(const JointActionSpace& space, std::span<const double> x,
                                       int agent) {
    std::vector<double> m(static_cast<std::size_t>(space.size(agent)), 0.0);
    for (long long a = 0; a < space.total(); ++a)
        m[static_cast<std::size_t>(space.action_of(a, agent))] += x[static_cast<std::size_t>(a)];
    return m;
}

/// Marginal of a joint distribution over A_{-i} (agent i's coordinate summed
/// out), indexed by the reduced mixed-radix encoding.
inline std::vector<double> marginal_excluding(const JointActionSpace& space,
                                              std::span<const double> x, int agent) {
    const long long am = space.total() / space.size(agent);
    std::vector<double> m(static_cast<std::size_t>(am), 0.0);
    for (long long a = 0; a < space.total(); ++a)
        m[static_cast<std::size_t>(space.encode_excluding(a, agent))] +=
            x[static_cast<std::size_t>(a)];
    return m;
}

inline std::vector<double> marginal_excluding(const JointPolicy& pi, int h, int s, int agent) {
    return marginal_excluding(pi.actions, pi.row(h, s), agent);
}

/// Max-norm distance between a joint distribution and the outer product of
/// its per-agent marginals; 0 for exact product distributions.
inline double product_deviation(const JointActionSpace& space, std::span<const double> x) {
    const int n = space.agent_count();
    std::vector<std::vector<double>> marg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) marg[static_cast<std::size_t>(i)] = marginal_of(space, x, i);
    double dev = 0.0;
    for (long long a = 0; a < space.total(); ++a) {
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            prod *= marg[static_cast<std::size_t>(i)][static_cast<std::size_t>(space.action_of(a, i))];
        dev = std::max(dev, std::abs(prod - x[static_cast<std::size_t>(a)]));
    }
    return dev;
}

/// Validates a policy against a game's shape: rows are distributions, and
/// Product-kind rows factor within 1e-10.
inline void validate(const JointPolicy& pi) {
    if (pi.horizon < 1 || pi.state_count < 1) throw ShapeMismatch("policy has empty shape");
    const long long A = pi.actions.total();
    if (pi.dist.size() != static_cast<std::size_t>(pi.horizon) * pi.state_count * A)
        throw ShapeMismatch("policy tensor has wrong size");
    for (int h = 0; h < pi.horizon; ++h) {
        for (int s = 0; s < pi.state_count; ++s) {
            auto row = pi.row(h, s);
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0) throw ValidationError("negative policy probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbTolConstruct)
                throw ValidationError("policy row (h=" + std::to_string(h) +
                                      ", s=" + std::to_string(s) + ") sums to " + std::to_string(sum));
            if (pi.kind == PolicyKind::Product && product_deviation(pi.actions, row) > kProbTolDerived)
                throw NotProductDistribution("policy row (h=" + std::to_string(h) + ", s=" +
                                             std::to_string(s) + ") is not a product distribution");
        }
    }
}

inline void check_compatible(const RobustMarkovGame& g, const JointPolicy& pi) {
    if (pi.horizon != g.horizon || pi.state_count != g.state_count || !(pi.actions == g.actions))
        throw ShapeMismatch("policy shape does not match game");
}

/// V[i][h][s] with h in 0..H (the row h = H is identically zero).
struct ValueTensor {
    int agent_count = 0;
    int horizon = 0;
    int state_count = 0;
    std::vector<double> v;

    ValueTensor() = default;
    ValueTensor(int n, int H, int S)
        : agent_count(n), horizon(H), state_count(S),
          v(static_cast<std::size_t>(n) * (H + 1) * S, 0.0) {}

    double& at(int i, int h, int s) {
        return v[static_cast<std::size_t>((static_cast<long long>(i) * (horizon + 1) + h) * state_count + s)];
    }
    double at(int i, int h, int s) const {
        return v[static_cast<std::size_t>((static_cast<long long>(i) * (horizon + 1) + h) * state_count + s)];
    }
    std::span<double> slice(int i, int h) {
        return {v.data() + static_cast<std::size_t>((static_cast<long long>(i) * (horizon + 1) + h) * state_count),
                static_cast<std::size_t>(state_count)};
    }
    std::span<const double> slice(int i, int h) const {
        return {v.data() + static_cast<std::size_t>((static_cast<long long>(i) * (horizon + 1) + h) * state_count),
                static_cast<std::size_t>(state_count)};
    }
};

/// Q[i][h][s][a] over encoded joint profiles.
struct QTensor {
    int agent_count = 0;
    int horizon = 0;
    int state_count = 0;
    long long joint_actions = 0;
    std::vector<double> q;

    QTensor() = default;
    QTensor(int n, int H, int S, long long A)
        : agent_count(n), horizon(H), state_count(S), joint_actions(A),
          q(static_cast<std::size_t>(n) * H * S * A, 0.0) {}

    std::size_t index(int i, int h, int s, long long a) const {
        return static_cast<std::size_t>(((static_cast<long long>(i) * horizon + h) * state_count + s) *
                                            joint_actions + a);
    }
    double& at(int i, int h, int s, long long a) { return q[index(i, h, s, a)]; }
    double at(int i, int h, int s, long long a) const { return q[index(i, h, s, a)]; }
    std::span<const double> row(int i, int h, int s) const {
        return {q.data() + index(i, h, s, 0), static_cast<std::size_t>(joint_actions)};
    }
    std::span<double> row(int i, int h, int s) {
        return {q.data() + index(i, h, s, 0), static_cast<std::size_t>(joint_actions)};
    }
};

}  // namespace rmg
