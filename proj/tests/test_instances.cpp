#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "rmg/dr_nvi.hpp"
#include "rmg/evaluation.hpp"
#include "rmg/instances.hpp"

using namespace rmg;

TEST_CASE("fishing game payoffs and transitions") {
    auto g = fishing_game(0.049, 3);
    REQUIRE_NOTHROW(validate(g));
    REQUIRE(g.state_count == 101);
    // officer's payoff under (illegal, patrol) is 3 - 2p
    REQUIRE(g.r(1, 0, 7, 3) == Catch::Approx(2.902).margin(1e-15));
    REQUIRE(g.r(0, 2, 50, 2) == Catch::Approx(-0.98).margin(1e-15));
    REQUIRE(g.r(0, 0, 0, 0) == -1.0);
    // illegal fishing advances the count with probability p
    REQUIRE(g.kernel_row(0, 10, 2)[11] == Catch::Approx(0.049).margin(1e-15));
    REQUIRE(g.kernel_row(0, 10, 2)[10] == Catch::Approx(0.951).margin(1e-15));
    REQUIRE(g.kernel_row(0, 10, 0)[10] == 1.0);
    REQUIRE(g.kernel_row(0, 100, 3)[100] == 1.0);  // revoked state absorbs

    auto g51 = fishing_game(0.051, 2);
    REQUIRE(g51.r(0, 0, 3, 2) == Catch::Approx(-1.02).margin(1e-15));

    auto g0 = fishing_game(0.0, 2);
    REQUIRE(g0.r(0, 0, 0, 2) == 0.0);          // -20 p vanishes
    REQUIRE(g0.kernel_row(0, 5, 2)[5] == 1.0);  // state never advances
}

TEST_CASE("fishing standard solutions flip across p = 0.05") {
    auto a = fishing_solve(0.049, 100, false);
    auto b = fishing_solve(0.051, 100, false);
    for (int h = 0; h < 100; ++h) {
        REQUIRE(a.profile[static_cast<std::size_t>(h)] == std::array<int, 2>{1, 1});
        REQUIRE(b.profile[static_cast<std::size_t>(h)] == std::array<int, 2>{0, 0});
    }
    // values follow the closed recursion: v1 = -20p (H - h), v2 = (3 - 2p)(H - h)
    REQUIRE(a.v1[99] == Catch::Approx(-0.98).margin(1e-12));
    REQUIRE(a.v2[0] == Catch::Approx(2.902 * 100).margin(1e-9));
    REQUIRE(b.v1[0] == Catch::Approx(-100.0).margin(1e-9));
}

TEST_CASE("fishing robust solution is identical in both cities") {
    for (double p : {0.049, 0.051}) {
        auto sol = fishing_solve(p, 100, true, 0.005);
        for (int h = 0; h < 100; ++h)
            REQUIRE(sol.profile[static_cast<std::size_t>(h)] == std::array<int, 2>{0, 0});
    }
}

TEST_CASE("boundary parameter has no unique equilibrium") {
    REQUIRE_THROWS_AS(fishing_solve(0.05, 3, false), NonUniqueEquilibrium);
}

TEST_CASE("dr_nvi on the exported fishing game reproduces the closed-form policy") {
    for (double p : {0.049, 0.051}) {
        auto g = fishing_game(p, 4);
        auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
        const long long want = p < 0.05 ? 3 : 0;  // encoded (1,1) or (0,0)
        for (int h = 0; h < g.horizon; ++h)
            for (int s = 0; s < g.state_count; ++s)
                REQUIRE(sol.policy.row(h, s)[static_cast<std::size_t>(want)] == 1.0);
    }
}

TEST_CASE("fishing rollouts") {
    REQUIRE(fishing_rollout(0.049, 10000, {0, 0}, 7) == 0);   // never fishes illegally
    REQUIRE(fishing_rollout(0.0, 10000, {1, 1}, 7) == 0);     // p = 0 never advances
    REQUIRE(fishing_rollout(0.049, 10000, {1, 1}, 7) == 100); // frozen seed, Hp >> 100
}

TEST_CASE("theta set for H = 16 verified exhaustively") {
    auto ts = build_theta_set(16);
    REQUIRE(ts.min_distance == 2);
    REQUIRE(ts.words.size() >= 8);
    REQUIRE(ts.words[0] == 0);  // lexicographic greedy starts at the base vector
    for (std::size_t i = 0; i < ts.words.size(); ++i)
        for (std::size_t j = i + 1; j < ts.words.size(); ++j)
            REQUIRE(std::popcount(ts.words[i] ^ ts.words[j]) >= 2);
    REQUIRE(build_theta_set(16).words == ts.words);  // pinned construction
    REQUIRE_THROWS_AS(build_theta_set(8), ValidationError);
}

namespace {

HardInstanceSpec default_spec(int H = 16, double sigma = 0.1, int w = 1) {
    HardInstanceSpec spec;
    spec.S = 2;
    spec.A = 2;
    spec.H = H;
    spec.sigma = sigma;
    spec.eps = 0.01;
    spec.w = w;
    auto ts = build_theta_set(H);
    spec.theta = ts.theta(1);
    return spec;
}

}  // namespace

TEST_CASE("parameter schedule branches") {
    // sigma = 0.01, H = 20, c2 = 0.25: the low-sigma branch needs
    // sigma <= c2 / (2H) = 0.00625, so this lands in the high branch
    auto spec = default_spec(20, 0.01);
    auto f = finalize(spec);
    REQUIRE_FALSE(f.low_sigma_branch());
    REQUIRE(f.p == Catch::Approx((1.0 + f.c1 / 20.0) * 0.01).margin(1e-15));
    REQUIRE(f.q == Catch::Approx(f.p - f.delta).margin(1e-18));
    REQUIRE(f.q >= f.sigma);

    auto low = default_spec(20, 0.004);
    low.eps = 0.01;  // <= c2 / H = 0.0125
    auto fl = finalize(low);
    REQUIRE(fl.low_sigma_branch());
    REQUIRE(fl.p == Catch::Approx(0.25 / 20.0).margin(1e-15));
    REQUIRE(fl.delta == Catch::Approx(fl.c5 * 0.01 / 400.0).margin(1e-18));

    auto bad = default_spec(20, 0.004);
    bad.eps = 0.2;  // violates eps <= c2 / H on the low branch
    REQUIRE_THROWS_AS(finalize(bad), ParameterRegimeViolation);

    auto bad2 = default_spec();
    bad2.sigma = 0.9;  // above 1 - c0
    REQUIRE_THROWS_AS(finalize(bad2), ParameterRegimeViolation);
}

TEST_CASE("built chain rows sum to one exactly and Y states absorb with reward 1") {
    auto spec = default_spec();
    auto g = build_hard_rmdp(spec);
    REQUIRE_NOTHROW(validate(g));
    REQUIRE(g.normalized());
    REQUIRE(g.state_count == 2 * spec.S * spec.A);
    const int W = spec.S * spec.A;
    for (int h = 0; h < g.horizon; ++h)
        for (int s = 0; s < g.state_count; ++s)
            for (long long a = 0; a < 2; ++a) {
                auto row = g.kernel_row(h, s, a);
                double sum = 0.0;
                for (double v : row) sum += v;
                REQUIRE(sum == 1.0);
                if (s >= W) {
                    REQUIRE(row[static_cast<std::size_t>(s)] == 1.0);
                    REQUIRE(g.r(0, h, s, a) == 1.0);
                } else {
                    REQUIRE(g.r(0, h, s, a) == 0.0);
                }
            }
    // x_w rates keyed by theta, other X states by the base vector
    const auto f = finalize(spec);
    for (int h = 0; h < g.horizon; ++h) {
        const int th = f.theta[static_cast<std::size_t>(h)];
        REQUIRE(g.kernel_row(h, f.w, th)[static_cast<std::size_t>(W + f.w)] ==
                Catch::Approx(f.p).margin(1e-18));
        REQUIRE(g.kernel_row(h, f.w, 1 - th)[static_cast<std::size_t>(W + f.w)] ==
                Catch::Approx(f.q).margin(1e-18));
        const int other = f.w == 0 ? 1 : 0;
        REQUIRE(g.kernel_row(h, other, 0)[static_cast<std::size_t>(W + other)] ==
                Catch::Approx(f.p + f.delta).margin(1e-18));
        REQUIRE(g.kernel_row(h, other, 1)[static_cast<std::size_t>(W + other)] ==
                Catch::Approx(f.p).margin(1e-18));
    }
}

TEST_CASE("geometric gap formula") {
    // standalone check of sum_{j=0}^{H-h} (1-p)^j at p = 0.1: 1 + 0.9 + 0.81
    const double p = 0.1;
    double gap = 0.0;
    for (int j = 0; j <= 2; ++j) gap += std::pow(1.0 - p, j);
    REQUIRE(gap == Catch::Approx(2.71).margin(1e-12));

    auto spec = default_spec();
    auto cf = hard_rmdp_closed_form(spec);
    const auto f = finalize(spec);
    REQUIRE(cf.gap_h[static_cast<std::size_t>(spec.H - 1)] == 1.0);  // single term at the end
    for (int h = 0; h + 1 < spec.H; ++h)
        REQUIRE(cf.gap_h[static_cast<std::size_t>(h)] ==
                Catch::Approx(1.0 + (1.0 - f.p) * cf.gap_h[static_cast<std::size_t>(h + 1)])
                    .margin(1e-12));
    REQUIRE(cf.value_y_w - cf.value_x_w == Catch::Approx(cf.gap_h[0]).margin(1e-10));
}

TEST_CASE("dr_nvi agrees with the hard-instance closed form") {
    for (double sigma : {0.004, 0.1, 0.5}) {
        auto spec = default_spec(16, sigma);
        auto g = build_hard_rmdp(spec);
        auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
        auto cf = hard_rmdp_closed_form(spec);
        const auto f = finalize(spec);
        const int W = spec.S * spec.A;
        const int xw = f.w, yw = W + f.w;
        for (int h = 0; h < spec.H; ++h) {
            const double gap = sol.v.at(0, h, yw) - sol.v.at(0, h, xw);
            REQUIRE(std::abs(gap - cf.gap_h[static_cast<std::size_t>(h)]) <= 1e-10);
            for (int s = 0; s < W; ++s) {
                const int want = cf.action[static_cast<std::size_t>(h) * g.state_count + s];
                REQUIRE(sol.policy.row(h, s)[static_cast<std::size_t>(want)] == 1.0);
            }
        }
        // optimal-value recursion at x_w with the worst case absorbing into x_w
        const double pl = f.p - f.sigma;
        for (int h = 0; h < spec.H; ++h) {
            const double want =
                pl * sol.v.at(0, h + 1, yw) + (1.0 - pl) * sol.v.at(0, h + 1, xw);
            REQUIRE(std::abs(sol.v.at(0, h, xw) - want) <= 1e-10);
        }
    }
}

TEST_CASE("state ordering of the optimal values") {
    auto spec = default_spec(16, 0.1, 2);
    auto g = build_hard_rmdp(spec);
    auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
    const int W = spec.S * spec.A;
    const int xw = spec.w;
    for (int h = 0; h < spec.H; ++h) {
        for (int s = 0; s < W; ++s) {
            if (s != xw) REQUIRE(sol.v.at(0, h, xw) <= sol.v.at(0, h, s) + 1e-12);
            REQUIRE(sol.v.at(0, h, s) < sol.v.at(0, h, W + s));
        }
    }
}

TEST_CASE("exported fishing game round-trips through the sampler shapes") {
    auto g = fishing_game(0.049, 2);
    REQUIRE(g.joint_actions() == 4);
    REQUIRE_FALSE(g.normalized());
}

TEST_CASE("constant (0,0) policy is an exact equilibrium at the worst-case parameter") {
    // the parametric worst case for both agents substitutes p + sigma, so the
    // no-fishing profile must carry zero best-response gap on that game
    const double p = 0.049, sigma = 0.005;
    auto g = fishing_game(p + sigma, 5);
    JointPolicy pi;
    pi.horizon = g.horizon;
    pi.state_count = g.state_count;
    pi.actions = g.actions;
    pi.kind = PolicyKind::Product;
    pi.dist.assign(static_cast<std::size_t>(g.horizon) * g.state_count * 4, 0.0);
    for (int h = 0; h < g.horizon; ++h)
        for (int s = 0; s < g.state_count; ++s) pi.row(h, s)[0] = 1.0;
    REQUIRE(gap_ne(g, pi) <= 1e-12);
}
