#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmg/core.hpp"
#include "rmg/errors.hpp"

namespace rmg {

/// One-shot game over encoded joint profiles; payoff[i][a].
struct StageGame {
    JointActionSpace actions;
    std::vector<double> payoff;  // [n][A] flattened

    double u(int i, long long a) const {
        return payoff[static_cast<std::size_t>(static_cast<long long>(i) * actions.total() + a)];
    }
    std::span<const double> row(int i) const {
        return {payoff.data() + static_cast<std::size_t>(static_cast<long long>(i) * actions.total()),
                static_cast<std::size_t>(actions.total())};
    }
};

enum class EqKind { Nash, CE, CCE };

inline const char* to_string(EqKind k) {
    switch (k) {
        case EqKind::Nash: return "nash";
        case EqKind::CE: return "ce";
        case EqKind::CCE: return "cce";
    }
    return "?";
}

struct EquilibriumSolution {
    std::vector<double> dist;    // over encoded joint profiles
    double certified_gap = 0.0;  // recomputed by the matching gap certifier
    EqKind kind = EqKind::CCE;
    long iterations = 0;
};

/// Largest unilateral-deviation benefit over agents, clamped at zero:
/// max_i [ max_b sum_{a_-i} x_-i(a_-i) u_i(b, a_-i) - sum_a x(a) u_i(a) ].
inline double stage_gap_cce(const StageGame& g, std::span<const double> x) {
    const int n = g.actions.agent_count();
    const long long A = g.actions.total();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const int Ai = g.actions.size(i);
        const long long Am = A / Ai;
        std::vector<double> xm(static_cast<std::size_t>(Am), 0.0);
        double current = 0.0;
        for (long long a = 0; a < A; ++a) {
            xm[static_cast<std::size_t>(g.actions.encode_excluding(a, i))] += x[static_cast<std::size_t>(a)];
            current += x[static_cast<std::size_t>(a)] * g.u(i, a);
        }
        double best = -std::numeric_limits<double>::infinity();
        for (int b = 0; b < Ai; ++b) {
            double dev = 0.0;
            for (long long r = 0; r < Am; ++r)
                dev += xm[static_cast<std::size_t>(r)] * g.u(i, g.actions.compose(r, i, b));
            best = std::max(best, dev);
        }
        worst = std::max(worst, best - current);
    }
    return std::max(worst, 0.0);
}

/// Largest strategy-modification (swap) benefit over agents, clamped at zero:
/// max_i sum_{a_i} max_b sum_{a_-i} x(a_i, a_-i) [u_i(b, a_-i) - u_i(a_i, a_-i)].
inline double stage_gap_ce(const StageGame& g, std::span<const double> x) {
    const int n = g.actions.agent_count();
    const long long A = g.actions.total();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const int Ai = g.actions.size(i);
        const long long Am = A / Ai;
        double total = 0.0;
        std::vector<double> w(static_cast<std::size_t>(Am));
        for (int ai = 0; ai < Ai; ++ai) {
            double keep = 0.0;
            for (long long r = 0; r < Am; ++r) {
                const long long a = g.actions.compose(r, i, ai);
                w[static_cast<std::size_t>(r)] = x[static_cast<std::size_t>(a)];
                keep += w[static_cast<std::size_t>(r)] * g.u(i, a);
            }
            double best = keep;  // b = a_i is always available
            for (int b = 0; b < Ai; ++b) {
                if (b == ai) continue;
                double swapped = 0.0;
                for (long long r = 0; r < Am; ++r)
                    swapped += w[static_cast<std::size_t>(r)] * g.u(i, g.actions.compose(r, i, b));
                best = std::max(best, swapped);
            }
            total += best - keep;
        }
        worst = std::max(worst, total);
    }
    return std::max(worst, 0.0);
}

/// Unilateral-deviation gap of a product distribution (same formula as the
/// CCE gap; rejects non-product inputs).
inline double stage_gap_ne(const StageGame& g, std::span<const double> x) {
    if (product_deviation(g.actions, x) > kProbTolDerived)
        throw NotProductDistribution("stage_gap_ne requires a product distribution");
    return stage_gap_cce(g, x);
}

/// Exhaustive scan for a pure Nash profile (lexicographically first profile
/// with no strictly improving unilateral deviation at tolerance 1e-12).
inline std::optional<EquilibriumSolution> compute_pure_nash(const StageGame& g) {
    const long long A = g.actions.total();
    if (A > 1000000) throw ShapeMismatch("compute_pure_nash: joint action space too large");
    const int n = g.actions.agent_count();
    for (long long a = 0; a < A; ++a) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const double cur = g.u(i, a);
            const long long r = g.actions.encode_excluding(a, i);
            for (int b = 0; b < g.actions.size(i); ++b) {
                if (g.u(i, g.actions.compose(r, i, b)) > cur + 1e-12) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            EquilibriumSolution sol;
            sol.dist.assign(static_cast<std::size_t>(A), 0.0);
            sol.dist[static_cast<std::size_t>(a)] = 1.0;
            sol.kind = EqKind::Nash;
            sol.iterations = 0;
            sol.certified_gap = stage_gap_ne(g, sol.dist);
            return sol;
        }
    }
    return std::nullopt;
}

namespace detail {

/// Gaussian elimination with partial pivoting; returns false when the system
/// is singular (pivot below tol) or inconsistent. a is row-major m x m, b has
/// length m; the solution overwrites b.
inline bool solve_linear(std::vector<double>& a, std::vector<double>& b, int m,
                         double tol = 1e-12) {
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * m + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * m + col]))
                piv = r;
        if (std::abs(a[static_cast<std::size_t>(piv) * m + col]) < tol) return false;
        if (piv != col) {
            for (int c = 0; c < m; ++c)
                std::swap(a[static_cast<std::size_t>(piv) * m + c], a[static_cast<std::size_t>(col) * m + c]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        const double d = a[static_cast<std::size_t>(col) * m + col];
        for (int r = col + 1; r < m; ++r) {
            const double f = a[static_cast<std::size_t>(r) * m + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < m; ++c)
                a[static_cast<std::size_t>(r) * m + c] -= f * a[static_cast<std::size_t>(col) * m + c];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < m; ++c)
            acc -= a[static_cast<std::size_t>(r) * m + c] * b[static_cast<std::size_t>(c)];
        b[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r) * m + r];
    }
    return true;
}

/// Solves the indifference system for one side of a support pair: find a
/// distribution x on `support` (of the opponent `owner`'s actions) making
/// every action in `target` of player `other` indifferent. Unknowns are x
/// plus the common value; uses least squares via normal equations when the
/// system is not square.
inline bool solve_indifference(const StageGame& g, int owner, int other,
                               const std::vector<int>& support, const std::vector<int>& target,
                               std::vector<double>& x_out) {
    const int k = static_cast<int>(support.size());
    const int m = static_cast<int>(target.size());
    const int cols = k + 1;   // x entries + common value v
    const int rows = m + 1;   // indifference rows + normalization
    std::vector<double> A(static_cast<std::size_t>(rows) * cols, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < k; ++c) {
            int prof[2];
            prof[owner] = support[static_cast<std::size_t>(c)];
            prof[other] = target[static_cast<std::size_t>(r)];
            A[static_cast<std::size_t>(r) * cols + c] = g.u(other, g.actions.encode(prof));
        }
        A[static_cast<std::size_t>(r) * cols + k] = -1.0;
    }
    for (int c = 0; c < k; ++c) A[static_cast<std::size_t>(m) * cols + c] = 1.0;
    rhs[static_cast<std::size_t>(m)] = 1.0;

    std::vector<double> sol;
    if (rows == cols) {
        std::vector<double> Ac = A, bc = rhs;
        if (!solve_linear(Ac, bc, cols)) return false;
        sol = std::move(bc);
    } else {
        // normal equations A^T A y = A^T b
        std::vector<double> AtA(static_cast<std::size_t>(cols) * cols, 0.0);
        std::vector<double> Atb(static_cast<std::size_t>(cols), 0.0);
        for (int r = 0; r < rows; ++r) {
            for (int c1 = 0; c1 < cols; ++c1) {
                const double arc1 = A[static_cast<std::size_t>(r) * cols + c1];
                Atb[static_cast<std::size_t>(c1)] += arc1 * rhs[static_cast<std::size_t>(r)];
                for (int c2 = 0; c2 < cols; ++c2)
                    AtA[static_cast<std::size_t>(c1) * cols + c2] +=
                        arc1 * A[static_cast<std::size_t>(r) * cols + c2];
            }
        }
        if (!solve_linear(AtA, Atb, cols)) return false;
        sol = std::move(Atb);
        // least-squares candidates must actually satisfy the system
        for (int r = 0; r < rows; ++r) {
            double acc = -rhs[static_cast<std::size_t>(r)];
            for (int c = 0; c < cols; ++c)
                acc += A[static_cast<std::size_t>(r) * cols + c] * sol[static_cast<std::size_t>(c)];
            if (std::abs(acc) > 1e-9) return false;
        }
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        if (sol[static_cast<std::size_t>(c)] < -1e-9) return false;
        sol[static_cast<std::size_t>(c)] = std::max(sol[static_cast<std::size_t>(c)], 0.0);
        sum += sol[static_cast<std::size_t>(c)];
    }
    if (std::abs(sum - 1.0) > 1e-9) return false;
    x_out.assign(sol.begin(), sol.begin() + k);
    for (double& p : x_out) p /= sum;
    return true;
}

inline void supports_of_size(int total, int size, std::vector<std::vector<int>>& out) {
    std::vector<int> cur;
    // lexicographic combinations
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(idx);
        int i = size - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - size + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace detail

/// Mixed Nash for two-player games by support enumeration. Support pairs are
/// visited in increasing total size (pure 1x1 pairs first), each candidate is
/// verified by the gap certifier, and the first pair certifying
/// stage_gap_ne <= 1e-8 wins. Existence is guaranteed by Nash's theorem;
/// NumericalFailure signals that no support pair certified.
inline EquilibriumSolution compute_nash_2p(const StageGame& g) {
    const int n = g.actions.agent_count();
    if (n != 2) throw ShapeMismatch("compute_nash_2p requires exactly two agents");
    const int A1 = g.actions.size(0), A2 = g.actions.size(1);
    if (A1 > 6 || A2 > 6) throw ShapeMismatch("compute_nash_2p supports at most 6 actions per agent");

    std::vector<std::vector<std::vector<int>>> supp1(static_cast<std::size_t>(A1) + 1),
        supp2(static_cast<std::size_t>(A2) + 1);
    for (int k = 1; k <= A1; ++k) detail::supports_of_size(A1, k, supp1[static_cast<std::size_t>(k)]);
    for (int k = 1; k <= A2; ++k) detail::supports_of_size(A2, k, supp2[static_cast<std::size_t>(k)]);

    for (int tot = 2; tot <= A1 + A2; ++tot) {
        for (int k1 = 1; k1 <= A1; ++k1) {
            const int k2 = tot - k1;
            if (k2 < 1 || k2 > A2) continue;
            for (const auto& s1 : supp1[static_cast<std::size_t>(k1)]) {
                for (const auto& s2 : supp2[static_cast<std::size_t>(k2)]) {
                    std::vector<double> x, y;
                    if (!detail::solve_indifference(g, 0, 1, s1, s2, x)) continue;
                    if (!detail::solve_indifference(g, 1, 0, s2, s1, y)) continue;
                    std::vector<double> p1(static_cast<std::size_t>(A1), 0.0),
                        p2(static_cast<std::size_t>(A2), 0.0);
                    for (int c = 0; c < k1; ++c)
                        p1[static_cast<std::size_t>(s1[static_cast<std::size_t>(c)])] =
                            x[static_cast<std::size_t>(c)];
                    for (int c = 0; c < k2; ++c)
                        p2[static_cast<std::size_t>(s2[static_cast<std::size_t>(c)])] =
                            y[static_cast<std::size_t>(c)];
                    EquilibriumSolution sol;
                    sol.dist.assign(static_cast<std::size_t>(g.actions.total()), 0.0);
                    for (int a = 0; a < A1; ++a)
                        for (int b = 0; b < A2; ++b)
                            sol.dist[static_cast<std::size_t>(a * A2 + b)] =
                                p1[static_cast<std::size_t>(a)] * p2[static_cast<std::size_t>(b)];
                    sol.kind = EqKind::Nash;
                    sol.iterations = 0;
                    sol.certified_gap = stage_gap_ne(g, sol.dist);
                    if (sol.certified_gap <= 1e-8) return sol;
                }
            }
        }
    }
    throw NumericalFailure("compute_nash_2p: no support pair certified an equilibrium");
}

namespace detail {

/// Per-agent coordinate table and leave-one-out product weights shared by the
/// learning dynamics.
struct LearnerTables {
    int n = 0;
    long long A = 0;
    std::vector<int> coord;      // [a * n + i] = agent i's action in profile a
    std::vector<double> lo_buf;  // scratch: [a * n + i] leave-one-out products

    explicit LearnerTables(const JointActionSpace& space)
        : n(space.agent_count()), A(space.total()),
          coord(static_cast<std::size_t>(space.total()) * space.agent_count()),
          lo_buf(static_cast<std::size_t>(space.total()) * space.agent_count()) {
        std::vector<int> prof(static_cast<std::size_t>(n));
        for (long long a = 0; a < A; ++a) {
            space.decode(a, prof);
            for (int i = 0; i < n; ++i)
                coord[static_cast<std::size_t>(a * n + i)] = prof[static_cast<std::size_t>(i)];
        }
    }

    /// Fills lo_buf with prod_{j != i} p_j(a_j) for every profile and agent.
    void leave_one_out(const std::vector<std::vector<double>>& p) {
        std::vector<double> pref(static_cast<std::size_t>(n) + 1), suff(static_cast<std::size_t>(n) + 1);
        for (long long a = 0; a < A; ++a) {
            pref[0] = 1.0;
            for (int i = 0; i < n; ++i)
                pref[static_cast<std::size_t>(i + 1)] =
                    pref[static_cast<std::size_t>(i)] *
                    p[static_cast<std::size_t>(i)][static_cast<std::size_t>(coord[static_cast<std::size_t>(a * n + i)])];
            suff[static_cast<std::size_t>(n)] = 1.0;
            for (int i = n - 1; i >= 0; --i)
                suff[static_cast<std::size_t>(i)] =
                    suff[static_cast<std::size_t>(i + 1)] *
                    p[static_cast<std::size_t>(i)][static_cast<std::size_t>(coord[static_cast<std::size_t>(a * n + i)])];
            for (int i = 0; i < n; ++i)
                lo_buf[static_cast<std::size_t>(a * n + i)] =
                    pref[static_cast<std::size_t>(i)] * suff[static_cast<std::size_t>(i + 1)];
        }
    }
};

/// Payoffs rescaled per agent to [0, 1] for the learners; gaps are always
/// certified on the original payoffs.
inline std::vector<std::vector<double>> normalized_payoffs(const StageGame& g) {
    const int n = g.actions.agent_count();
    std::vector<std::vector<double>> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto row = g.row(i);
        const double lo = *std::min_element(row.begin(), row.end());
        const double hi = *std::max_element(row.begin(), row.end());
        const double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
        u[static_cast<std::size_t>(i)].resize(row.size());
        for (std::size_t a = 0; a < row.size(); ++a)
            u[static_cast<std::size_t>(i)][a] = (row[a] - lo) * scale;
    }
    return u;
}

/// Lexicographically first pure profile that is a weak Nash equilibrium with
/// zero deviation slack; both regret dynamics use it as a fast exit because a
/// pure equilibrium point mass is already an exact CE and CCE.
inline std::optional<long long> exact_pure_equilibrium(const StageGame& g) {
    const long long A = g.actions.total();
    const int n = g.actions.agent_count();
    for (long long a = 0; a < A; ++a) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const double cur = g.u(i, a);
            const long long r = g.actions.encode_excluding(a, i);
            for (int b = 0; b < g.actions.size(i); ++b) {
                if (g.u(i, g.actions.compose(r, i, b)) > cur) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return a;
    }
    return std::nullopt;
}

inline bool should_certify(long t, long max_iters) {
    return t <= 1024 || (t & 1023) == 0 || t == max_iters;
}

}  // namespace detail

inline constexpr long kDefaultEqMaxIters = 1000000;

/// Coarse correlated equilibrium by simultaneous multiplicative-weights
/// (external-regret) learners with anytime step eta_t = sqrt(8 ln A_i / t),
/// run on per-agent payoffs rescaled to [0, 1]. The returned distribution is
/// the time average of the product of the current mixed strategies, and its
/// gap is certified by stage_gap_cce at runtime; the gap may exceed tol only
/// when max_iters was exhausted (visible via `iterations`).
inline EquilibriumSolution compute_cce(const StageGame& g, double tol = 1e-3,
                                       long max_iters = kDefaultEqMaxIters) {
    if (!(tol > 0.0)) throw ValidationError("compute_cce: tol must be positive");
    const int n = g.actions.agent_count();
    const long long A = g.actions.total();

    if (auto pure = detail::exact_pure_equilibrium(g)) {
        EquilibriumSolution sol;
        sol.dist.assign(static_cast<std::size_t>(A), 0.0);
        sol.dist[static_cast<std::size_t>(*pure)] = 1.0;
        sol.kind = EqKind::CCE;
        sol.iterations = 0;
        sol.certified_gap = stage_gap_cce(g, sol.dist);
        return sol;
    }

    const auto u = detail::normalized_payoffs(g);
    detail::LearnerTables tab(g.actions);
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n)),
        gain(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        p[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(g.actions.size(i)),
                                              1.0 / g.actions.size(i));
        gain[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(g.actions.size(i)), 0.0);
    }
    std::vector<double> avg(static_cast<std::size_t>(A), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(A));

    EquilibriumSolution sol;
    sol.kind = EqKind::CCE;
    for (long t = 1; t <= max_iters; ++t) {
        tab.leave_one_out(p);
        // accumulate the joint product into the running average and the
        // expected payoff of every unilateral action
        for (long long a = 0; a < A; ++a) {
            const double w0 = tab.lo_buf[static_cast<std::size_t>(a * n)] *
                              p[0][static_cast<std::size_t>(tab.coord[static_cast<std::size_t>(a * n)])];
            avg[static_cast<std::size_t>(a)] += w0;
        }
        for (int i = 0; i < n; ++i) {
            auto& gi = gain[static_cast<std::size_t>(i)];
            for (long long a = 0; a < A; ++a)
                gi[static_cast<std::size_t>(tab.coord[static_cast<std::size_t>(a * n + i)])] +=
                    tab.lo_buf[static_cast<std::size_t>(a * n + i)] *
                    u[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        }
        // refresh mixed strategies from cumulative gains
        for (int i = 0; i < n; ++i) {
            const double eta = std::sqrt(8.0 * std::log(static_cast<double>(g.actions.size(i))) /
                                         static_cast<double>(t));
            auto& gi = gain[static_cast<std::size_t>(i)];
            auto& pi = p[static_cast<std::size_t>(i)];
            const double gmax = *std::max_element(gi.begin(), gi.end());
            double z = 0.0;
            for (std::size_t b = 0; b < pi.size(); ++b) {
                pi[b] = std::exp(eta * (gi[b] - gmax));
                z += pi[b];
            }
            for (double& v : pi) v /= z;
        }
        if (detail::should_certify(t, max_iters)) {
            for (long long a = 0; a < A; ++a)
                dist[static_cast<std::size_t>(a)] = avg[static_cast<std::size_t>(a)] / static_cast<double>(t);
            const double gap = stage_gap_cce(g, dist);
            if (gap <= tol || t == max_iters) {
                sol.dist = dist;
                sol.certified_gap = gap;
                sol.iterations = t;
                return sol;
            }
        }
    }
    // not reached; max_iters branch above always returns
    throw NumericalFailure("compute_cce: unreachable");
}

/// Correlated equilibrium by internal-regret matching: each agent tracks
/// cumulative swap regrets and plays the stationary distribution of the
/// induced switch matrix (Hart/Mas-Colell style). Same averaging and runtime
/// certification contract as compute_cce, with stage_gap_ce.
inline EquilibriumSolution compute_ce(const StageGame& g, double tol = 1e-3,
                                      long max_iters = kDefaultEqMaxIters) {
    if (!(tol > 0.0)) throw ValidationError("compute_ce: tol must be positive");
    const int n = g.actions.agent_count();
    const long long A = g.actions.total();

    if (auto pure = detail::exact_pure_equilibrium(g)) {
        EquilibriumSolution sol;
        sol.dist.assign(static_cast<std::size_t>(A), 0.0);
        sol.dist[static_cast<std::size_t>(*pure)] = 1.0;
        sol.kind = EqKind::CE;
        sol.iterations = 0;
        sol.certified_gap = stage_gap_ce(g, sol.dist);
        return sol;
    }

    const auto u = detail::normalized_payoffs(g);
    detail::LearnerTables tab(g.actions);
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n)),
        regret(static_cast<std::size_t>(n)), epay(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int Ai = g.actions.size(i);
        p[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(Ai), 1.0 / Ai);
        regret[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(Ai) * Ai, 0.0);
        epay[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(Ai), 0.0);
    }
    std::vector<double> avg(static_cast<std::size_t>(A), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(A));

    EquilibriumSolution sol;
    sol.kind = EqKind::CE;
    for (long t = 1; t <= max_iters; ++t) {
        tab.leave_one_out(p);
        for (long long a = 0; a < A; ++a) {
            const double w0 = tab.lo_buf[static_cast<std::size_t>(a * n)] *
                              p[0][static_cast<std::size_t>(tab.coord[static_cast<std::size_t>(a * n)])];
            avg[static_cast<std::size_t>(a)] += w0;
        }
        for (int i = 0; i < n; ++i) {
            auto& ei = epay[static_cast<std::size_t>(i)];
            std::fill(ei.begin(), ei.end(), 0.0);
            for (long long a = 0; a < A; ++a)
                ei[static_cast<std::size_t>(tab.coord[static_cast<std::size_t>(a * n + i)])] +=
                    tab.lo_buf[static_cast<std::size_t>(a * n + i)] *
                    u[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        }
        for (int i = 0; i < n; ++i) {
            const int Ai = g.actions.size(i);
            auto& Ri = regret[static_cast<std::size_t>(i)];
            auto& pi = p[static_cast<std::size_t>(i)];
            auto& ei = epay[static_cast<std::size_t>(i)];
            for (int ai = 0; ai < Ai; ++ai)
                for (int b = 0; b < Ai; ++b)
                    if (b != ai)
                        Ri[static_cast<std::size_t>(ai * Ai + b)] +=
                            pi[static_cast<std::size_t>(ai)] *
                            (ei[static_cast<std::size_t>(b)] - ei[static_cast<std::size_t>(ai)]);
            // switch matrix from positive average regrets; diag >= 1/2 keeps
            // the chain aperiodic
            const double mu = 2.0 * Ai;
            std::vector<double> M(static_cast<std::size_t>(Ai) * Ai, 0.0);
            for (int ai = 0; ai < Ai; ++ai) {
                double off = 0.0;
                for (int b = 0; b < Ai; ++b) {
                    if (b == ai) continue;
                    const double q =
                        std::max(Ri[static_cast<std::size_t>(ai * Ai + b)], 0.0) /
                        (static_cast<double>(t) * mu);
                    M[static_cast<std::size_t>(ai * Ai + b)] = q;
                    off += q;
                }
                M[static_cast<std::size_t>(ai * Ai + ai)] = 1.0 - off;
            }
            // stationary distribution: solve (M^T - I) pi = 0 with the last
            // row replaced by normalization; fall back to a few power steps
            // if the solve is degenerate
            const int m = Ai;
            std::vector<double> LHS(static_cast<std::size_t>(m) * m, 0.0),
                rhs(static_cast<std::size_t>(m), 0.0);
            for (int rrow = 0; rrow < m - 1; ++rrow)
                for (int c = 0; c < m; ++c)
                    LHS[static_cast<std::size_t>(rrow) * m + c] =
                        M[static_cast<std::size_t>(c * m + rrow)] - (rrow == c ? 1.0 : 0.0);
            for (int c = 0; c < m; ++c) LHS[static_cast<std::size_t>(m - 1) * m + c] = 1.0;
            rhs[static_cast<std::size_t>(m - 1)] = 1.0;
            std::vector<double> Lc = LHS, bc = rhs;
            bool solved = detail::solve_linear(Lc, bc, m, 1e-13);
            if (solved) {
                double z = 0.0;
                for (int c = 0; c < m; ++c) {
                    if (bc[static_cast<std::size_t>(c)] < -1e-9) { solved = false; break; }
                    bc[static_cast<std::size_t>(c)] = std::max(bc[static_cast<std::size_t>(c)], 0.0);
                    z += bc[static_cast<std::size_t>(c)];
                }
                if (solved && z > 0.0) {
                    for (int c = 0; c < m; ++c) pi[static_cast<std::size_t>(c)] = bc[static_cast<std::size_t>(c)] / z;
                }
            }
            if (!solved) {
                std::vector<double> nxt(static_cast<std::size_t>(m));
                for (int step = 0; step < 2 * m; ++step) {
                    for (int c = 0; c < m; ++c) {
                        double acc = 0.0;
                        for (int rrow = 0; rrow < m; ++rrow)
                            acc += pi[static_cast<std::size_t>(rrow)] * M[static_cast<std::size_t>(rrow * m + c)];
                        nxt[static_cast<std::size_t>(c)] = acc;
                    }
                    pi.assign(nxt.begin(), nxt.end());
                }
            }
        }
        if (detail::should_certify(t, max_iters)) {
            for (long long a = 0; a < A; ++a)
                dist[static_cast<std::size_t>(a)] = avg[static_cast<std::size_t>(a)] / static_cast<double>(t);
            const double gap = stage_gap_ce(g, dist);
            if (gap <= tol || t == max_iters) {
                sol.dist = dist;
                sol.certified_gap = gap;
                sol.iterations = t;
                return sol;
            }
        }
    }
    throw NumericalFailure("compute_ce: unreachable");
}

/// Dispatcher used by the value-iteration driver. Nash tries the pure scan,
/// then two-player support enumeration; anything else is intractable here.
inline EquilibriumSolution compute_equilibrium(const StageGame& g, EqKind kind, double tol,
                                               long max_iters = kDefaultEqMaxIters) {
    switch (kind) {
        case EqKind::CCE: return compute_cce(g, tol, max_iters);
        case EqKind::CE: return compute_ce(g, tol, max_iters);
        case EqKind::Nash: {
            if (auto pure = compute_pure_nash(g)) return *pure;
            if (g.actions.agent_count() == 2 && g.actions.size(0) <= 6 && g.actions.size(1) <= 6)
                return compute_nash_2p(g);
            throw NashIntractable(
                "no pure equilibrium and mixed Nash is only available for two-player games; "
                "use CE or CCE");
        }
    }
    throw NumericalFailure("compute_equilibrium: bad kind");
}

}  // namespace rmg
