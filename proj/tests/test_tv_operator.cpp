#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "rmg/tv_operator.hpp"

using namespace rmg;

TEST_CASE("clip") {
    std::vector<double> v{0.0, 1.0, 2.0};
    REQUIRE(clip(v, 1.0) == std::vector<double>{0.0, 1.0, 1.0});
    REQUIRE(clip(v, 5.0) == v);                              // alpha >= max leaves V unchanged
    REQUIRE(clip(v, 0.0) == std::vector<double>{0.0, 0.0, 0.0});  // alpha = min flattens
}

TEST_CASE("dual with sigma = 0 degenerates to the nominal expectation") {
    std::vector<double> p0{0.3, 0.2, 0.5};
    std::vector<double> v{1.0, -2.0, 0.25};
    const double want = 0.3 * 1.0 + 0.2 * -2.0 + 0.5 * 0.25;
    REQUIRE(dual_inf(p0, v, 0.0).value == Catch::Approx(want).margin(1e-15));
}

TEST_CASE("dual with sigma = 1 collapses to the minimum value") {
    std::vector<double> v{0.0, 1.0, 2.0};
    for (auto p0 : {std::vector<double>{1.0, 0.0, 0.0}, {0.2, 0.5, 0.3}, {0.0, 0.0, 1.0}})
        REQUIRE(dual_inf(p0, v, 1.0).value == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("worked two-state instance") {
    // grid brute force over the TV ball pins the value at 0.3 with alpha* = 1
    std::vector<double> p0{0.5, 0.5};
    std::vector<double> v{0.0, 1.0};
    const auto r = dual_inf(p0, v, 0.2);
    REQUIRE(r.value == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(r.alpha_star == 1.0);
    REQUIRE(oracles::tv_inf_two_state_grid(0.5, 0.0, 1.0, 0.2) ==
            Catch::Approx(0.3).margin(2e-4));
    const auto k = worst_case_kernel(p0, v, 0.2);
    REQUIRE(k[0] == Catch::Approx(0.7).margin(1e-12));
    REQUIRE(k[1] == Catch::Approx(0.3).margin(1e-12));

    const auto both = dual_inf_with_kernel(p0, v, 0.2);
    REQUIRE(both.worst_kernel.has_value());
    REQUIRE(*both.worst_kernel == k);
    REQUIRE((*both.worst_kernel)[0] * v[0] + (*both.worst_kernel)[1] * v[1] ==
            Catch::Approx(both.value).margin(1e-10));
}

TEST_CASE("worst-case kernel short circuits") {
    std::vector<double> p0{0.25, 0.75};
    REQUIRE(worst_case_kernel(p0, std::vector<double>{3.0, 1.0}, 0.0) == p0);  // sigma = 0
    REQUIRE(worst_case_kernel(p0, std::vector<double>{2.0, 2.0}, 0.4) == p0);  // V constant
}

TEST_CASE("sigma out of range is rejected") {
    std::vector<double> p0{1.0};
    std::vector<double> v{0.0};
    REQUIRE_THROWS_AS(dual_inf(p0, v, 1.5), SigmaOutOfRange);
    REQUIRE_THROWS_AS(worst_case_kernel(p0, v, -0.2), SigmaOutOfRange);
}

TEST_CASE("dual-primal agreement and bracketing on random instances") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uv(-3.0, 5.0);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    std::uniform_int_distribution<int> un(1, 20);
    for (int trial = 0; trial < 2000; ++trial) {
        const int S = un(rng);
        auto p0 = oracles::random_simplex(rng, S);
        std::vector<double> v(static_cast<std::size_t>(S));
        for (auto& x : v) x = uv(rng);
        const double sigma = us(rng);
        const auto d = dual_inf(p0, v, sigma);
        const auto k = worst_case_kernel(p0, v, sigma);

        double kv = 0.0, l1 = 0.0, ksum = 0.0, nominal = 0.0;
        double vmin = v[0];
        for (int s = 0; s < S; ++s) {
            kv += k[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(s)];
            l1 += std::abs(k[static_cast<std::size_t>(s)] - p0[static_cast<std::size_t>(s)]);
            ksum += k[static_cast<std::size_t>(s)];
            nominal += p0[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(s)];
            vmin = std::min(vmin, v[static_cast<std::size_t>(s)]);
        }
        REQUIRE(std::abs(kv - d.value) <= 1e-10);       // dual-primal agreement
        REQUIRE(0.5 * l1 <= sigma + 1e-12);             // kernel inside the ball
        REQUIRE(std::abs(ksum - 1.0) <= 1e-12);
        REQUIRE(d.value <= nominal + 1e-10);            // bracketing above
        REQUIRE(d.value >= vmin - 1e-10);               // bracketing below
    }
}

TEST_CASE("monotonicity in sigma and in V, and translation covariance") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> uv(-2.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 9);
        auto p0 = oracles::random_simplex(rng, S);
        std::vector<double> v(static_cast<std::size_t>(S));
        for (auto& x : v) x = uv(rng);

        double prev = std::numeric_limits<double>::infinity();
        for (double sigma : {0.0, 0.05, 0.2, 0.5, 1.0}) {
            const double val = dual_inf(p0, v, sigma).value;
            REQUIRE(val <= prev + 1e-12);
            prev = val;
        }

        std::vector<double> vup = v;
        for (auto& x : vup) x += std::abs(uv(rng));
        REQUIRE(dual_inf(p0, v, 0.3).value <= dual_inf(p0, vup, 0.3).value + 1e-12);

        const double c = uv(rng);
        std::vector<double> vshift = v;
        for (auto& x : vshift) x += c;
        REQUIRE(std::abs(dual_inf(p0, vshift, 0.3).value - (dual_inf(p0, v, 0.3).value + c)) <=
                1e-10);
    }
}

TEST_CASE("S = 2 value matches interval-endpoint enumeration exactly on dyadic data") {
    // dyadic probabilities and values make every operation exact in binary
    // floating point, so the two computation routes must agree bit for bit
    for (int ip = 0; ip <= 16; ++ip) {
        for (int is = 0; is <= 16; ++is) {
            for (int iv = -4; iv <= 4; ++iv) {
                const double p0 = ip / 16.0;
                const double sigma = is / 16.0;
                const double v0 = iv / 4.0;
                const double v1 = (iv + 3) / 4.0;
                std::vector<double> p{p0, 1.0 - p0};
                std::vector<double> v{v0, v1};
                const double got = dual_inf(p, v, sigma).value;
                const double want = oracles::tv_inf_two_state_endpoints(p0, v0, v1, sigma);
                REQUIRE(got == want);
            }
        }
    }
}

TEST_CASE("S = 2 value matches interval-endpoint enumeration on random data") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> uv(-5.0, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double p0 = u(rng);
        const double sigma = u(rng);
        const double v0 = uv(rng), v1 = uv(rng);
        std::vector<double> p{p0, 1.0 - p0};
        std::vector<double> v{v0, v1};
        REQUIRE(std::abs(dual_inf(p, v, sigma).value -
                         oracles::tv_inf_two_state_endpoints(p0, v0, v1, sigma)) <= 1e-12);
    }
}
