#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "rmg/dr_nvi.hpp"
#include "rmg/evaluation.hpp"

using namespace rmg;

TEST_CASE("sigma = 0 single-agent run matches plain value iteration") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = oracles::random_game(rng, 1, 4, 5, {3}, {0.0});
        auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
        auto vi = oracles::plain_vi_single_agent(g);
        for (int s = 0; s < g.state_count; ++s)
            REQUIRE(std::abs(sol.v.at(0, 0, s) - vi[static_cast<std::size_t>(s)]) <= 1e-10);
    }
}

TEST_CASE("H = 1 two-player run returns the stage equilibrium of the raw rewards") {
    std::mt19937_64 rng(103);
    auto g = oracles::random_game(rng, 2, 1, 3, {2, 2}, {0.3, 0.3});
    auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
    for (int s = 0; s < g.state_count; ++s) {
        StageGame stage;
        stage.actions = g.actions;
        stage.payoff.resize(2 * 4);
        for (int i = 0; i < 2; ++i)
            for (long long a = 0; a < 4; ++a)
                stage.payoff[static_cast<std::size_t>(i * 4 + a)] = g.r(i, 0, s, a);
        auto expect = compute_equilibrium(stage, EqKind::Nash, 1e-9);
        auto got = sol.policy.row(0, s);
        for (long long a = 0; a < 4; ++a)
            REQUIRE(got[static_cast<std::size_t>(a)] ==
                    Catch::Approx(expect.dist[static_cast<std::size_t>(a)]).margin(1e-12));
    }
}

TEST_CASE("value bounds hold on every cell") {
    std::mt19937_64 rng(107);
    auto g = oracles::random_game(rng, 2, 5, 3, {2, 2}, {0.25, 0.1}, -1.5, 2.0);
    auto sol = dr_nvi(g, EqKind::CCE, 1e-3);
    for (int i = 0; i < 2; ++i)
        for (int h = 0; h < g.horizon; ++h)
            for (int s = 0; s < g.state_count; ++s) {
                const double steps = g.horizon - h;
                REQUIRE(sol.v.at(i, h, s) >= g.reward_min * steps - 1e-9);
                REQUIRE(sol.v.at(i, h, s) <= g.reward_max * steps + 1e-9);
            }
}

TEST_CASE("value span bound on normalized games") {
    std::mt19937_64 rng(109);
    for (int trial = 0; trial < 10; ++trial) {
        const double sigma = 0.05 + 0.2 * (trial % 4);
        auto g = oracles::random_game(rng, 2, 6, 4, {2, 2}, {sigma, sigma});
        auto sol = dr_nvi(g, EqKind::CCE, 1e-3);
        REQUIRE(g.normalized());
        for (int i = 0; i < 2; ++i)
            for (int h = 0; h < g.horizon; ++h) {
                auto sl = sol.v.slice(i, h);
                const double span = *std::max_element(sl.begin(), sl.end()) -
                                    *std::min_element(sl.begin(), sl.end());
                const double cap = std::min(1.0 / sigma, static_cast<double>(g.horizon - h));
                REQUIRE(span <= cap + 1e-9);
            }
    }
}

TEST_CASE("returned values are the robust evaluation of the returned policy") {
    std::mt19937_64 rng(113);
    for (auto kind : {EqKind::Nash, EqKind::CCE, EqKind::CE}) {
        auto g = kind == EqKind::Nash ? oracles::random_team_game(rng, 3, 3, {2, 2}, 0.2)
                                      : oracles::random_game(rng, 2, 3, 3, {2, 2}, {0.2, 0.3});
        auto sol = dr_nvi(g, kind, 1e-4);
        auto v = robust_policy_eval(g, sol.policy);
        for (int i = 0; i < 2; ++i)
            for (int h = 0; h <= g.horizon; ++h)
                for (int s = 0; s < g.state_count; ++s)
                    REQUIRE(std::abs(v.at(i, h, s) - sol.v.at(i, h, s)) <= 1e-8);
    }
}

TEST_CASE("single-agent values are entrywise non-increasing in sigma") {
    std::mt19937_64 rng(127);
    auto base = oracles::random_game(rng, 1, 4, 4, {3}, {0.0});
    std::vector<double> prev(static_cast<std::size_t>(base.state_count),
                             std::numeric_limits<double>::infinity());
    for (double sigma : {0.0, 0.1, 0.3, 0.6, 1.0}) {
        auto g = base;
        g.sigma = {sigma};
        auto sol = dr_nvi(g, EqKind::Nash, 1e-9);
        for (int s = 0; s < g.state_count; ++s) {
            REQUIRE(sol.v.at(0, 0, s) <= prev[static_cast<std::size_t>(s)] + 1e-12);
            prev[static_cast<std::size_t>(s)] = sol.v.at(0, 0, s);
        }
    }
}

TEST_CASE("worker count does not change any output bit") {
    std::mt19937_64 rng(131);
    auto g = oracles::random_game(rng, 2, 4, 5, {2, 3}, {0.15, 0.4});
    auto serial = dr_nvi(g, EqKind::CCE, 1e-3, 1);
    auto parallel = dr_nvi(g, EqKind::CCE, 1e-3, 4);
    REQUIRE(serial.v.v == parallel.v.v);
    REQUIRE(serial.q.q == parallel.q.q);
    REQUIRE(serial.policy.dist == parallel.policy.dist);
    REQUIRE(serial.stage_gap == parallel.stage_gap);
}

TEST_CASE("nash policies are product, learner policies correlated") {
    std::mt19937_64 rng(137);
    auto team = oracles::random_team_game(rng, 2, 2, {2, 2}, 0.1);
    REQUIRE(dr_nvi(team, EqKind::Nash, 1e-9).policy.kind == PolicyKind::Product);
    auto g = oracles::random_game(rng, 2, 2, 2, {2, 2}, {0.1, 0.1});
    REQUIRE(dr_nvi(g, EqKind::CCE, 1e-3).policy.kind == PolicyKind::Correlated);
    REQUIRE_NOTHROW(validate(dr_nvi(team, EqKind::Nash, 1e-9).policy));
}
