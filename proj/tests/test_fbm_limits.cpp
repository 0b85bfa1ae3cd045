#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bss/fbm_limits.hpp"

using namespace bss;

TEST_CASE("fbm covariance kernel") {
    CHECK(fbm_cov(0.5, 1.0, 2.0) == Catch::Approx(1.0));          // Brownian min(s,t)
    CHECK(fbm_cov(0.37, 1.0, 1.0) == Catch::Approx(1.0));         // Var B^H_1 = 1
    CHECK(fbm_cov(1.0 / 3.0, 1.0, 2.0) ==
          Catch::Approx(std::pow(2.0, 2.0 / 3.0) / 2.0).epsilon(1e-15));
    CHECK(fbm_cov(1.0 / 3.0, 1.0, 2.0) == Catch::Approx(0.7937).margin(5e-5));
    CHECK_THROWS_AS(fbm_cov(1.2, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(fbm_cov(0.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("rho basics") {
    CHECK(rho(0.5, 1, 1, 1, 1) == Catch::Approx(0.0).margin(1e-15)); // independent increments
    CHECK(rho(0.5, 2, 1, 1, 0) == 1.0);
    CHECK(rho(0.37, 3, 2, 2, 0) == 1.0);
    CHECK(rho(1.0 / 3.0, 1, 1, 1, 1) ==
          Catch::Approx(0.5 * (std::pow(2.0, 2.0 / 3.0) - 2.0)).epsilon(1e-14));
    CHECK(rho(1.0 / 3.0, 1, 1, 1, 1) == Catch::Approx(-0.20630).margin(5e-6));
}

TEST_CASE("rho symmetry and bounds") {
    for (double H : {0.2, 0.45, 0.7}) {
        for (int k : {1, 2, 3}) {
            for (long j = 0; j <= 40; ++j) {
                for (int v : {1, 2}) {
                    const double p = rho(H, k, v, v, j);
                    CHECK(p == Catch::Approx(rho(H, k, v, v, -j)).margin(1e-13));
                    CHECK(std::fabs(p) <= 1.0 + 1e-12);
                }
                CHECK(std::fabs(rho(H, k, 1, 2, j)) <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("bilinear expansion matches the closed form for k=1") {
    for (int hi = 1; hi <= 9; ++hi) {
        const double H = 0.1 * hi;
        for (long j = 1; j <= 100; ++j) {
            CAPTURE(H, j);
            REQUIRE(rho(H, 1, 1, 1, j) ==
                    Catch::Approx(rho_k1_closed_form(H, j)).margin(1e-12));
        }
    }
}

TEST_CASE("rho decays with the predicted exponent") {
    // log-log slope over large lags within +-0.3 of 2(H-k)
    for (auto [H, k] : std::vector<std::pair<double, int>>{{1.0 / 3.0, 1}, {0.6, 2}}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (long j = 200; j <= 2000; j += 200) {
            const double x = std::log(double(j));
            const double y = std::log(std::fabs(rho(H, k, 1, 1, j)));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++n;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CAPTURE(H, k, slope);
        CHECK(std::fabs(slope - 2.0 * (H - k)) < 0.3);
    }
}

TEST_CASE("fbm_filter_corr table") {
    auto tab = fbm_filter_corr(1.0 / 3.0, 2, 8);
    CHECK(tab.at(1, 1, 0) == 1.0);
    CHECK(tab.at(2, 2, 0) == 1.0);
    CHECK(tab.at(1, 2, 3) == Catch::Approx(rho(1.0 / 3.0, 2, 1, 2, 3)));
    CHECK_THROWS_AS(tab.at(1, 1, 9), ValidationError);
}

TEST_CASE("lambda matrix closed cases") {
    auto m = lambda_matrix(0.5, 1);
    CHECK(m.l11 == 2.0); // all off-lag correlations vanish exactly
    CHECK(m.l22 == Catch::Approx(3.0).margin(1e-12));
    CHECK(m.l12 == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("lambda matrix against brute-force partial sums") {
    // independent oracle: direct partial sums to J = 1e6 of the closed-form
    // correlation, k = 1, H = 1/3
    const double H = 1.0 / 3.0;
    double sum = 1.0;
    for (long j = 1; j <= 1000000; ++j) {
        const double r = rho_k1_closed_form(H, j);
        sum += 2.0 * r * r;
    }
    const double oracle_l11 = 2.0 * sum;
    auto m = lambda_matrix(H, 1, 1e-8);
    CHECK(m.l11 == Catch::Approx(oracle_l11).epsilon(1e-6));
    // frozen references (series with certified tails)
    CHECK(m.l11 == Catch::Approx(2.185698373643).epsilon(1e-8));
    CHECK(m.l22 == Catch::Approx(2.680247620278).epsilon(1e-8));
    CHECK(m.l12 == Catch::Approx(1.775802308611).epsilon(1e-8));

    auto m2 = lambda_matrix(H, 2, 1e-8);
    CHECK(m2.l11 == Catch::Approx(3.294089988875).epsilon(1e-8));
    CHECK(m2.l22 == Catch::Approx(3.554871632460).epsilon(1e-8));
    CHECK(m2.l12 == Catch::Approx(1.478123510132).epsilon(1e-8));
}

TEST_CASE("lambda matrix is positive semidefinite with diagonal >= 2") {
    for (auto [H, k] : std::vector<std::pair<double, int>>{
             {1.0 / 3.0, 1}, {1.0 / 3.0, 2}, {0.3, 2}, {0.62, 3}, {0.74, 2}}) {
        auto m = lambda_matrix(H, k, 1e-7);
        CAPTURE(H, k);
        CHECK(m.l11 >= 2.0 - 1e-12);
        CHECK(m.l22 >= 2.0 - 1e-12);
        // eigenvalues of a symmetric 2x2
        const double tr = m.l11 + m.l22;
        const double det = m.l11 * m.l22 - m.l12 * m.l12;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        CHECK(tr / 2.0 - disc >= -1e-10);
    }
}

TEST_CASE("lambda entries are continuous in H") {
    for (double H : {0.15, 0.35, 0.55, 0.70}) {
        auto a = lambda_matrix(H, 2, 1e-9);
        auto b = lambda_matrix(H + 1e-6, 2, 1e-9);
        CHECK(std::fabs(a.l11 - b.l11) < 1e-3);
        CHECK(std::fabs(a.l12 - b.l12) < 1e-3);
        CHECK(std::fabs(a.l22 - b.l22) < 1e-3);
    }
}

TEST_CASE("lambda preconditions") {
    CHECK_THROWS_AS(lambda_matrix(0.8, 1), ValidationError);
    CHECK_NOTHROW(lambda_matrix(0.8, 2));
    CHECK_THROWS_AS(lambda_matrix(0.5, 0), ValidationError);
}

TEST_CASE("plug-in lambda clamps out-of-range estimates") {
    SECTION("alpha 0 with k=1 gives the Brownian matrix") {
        auto m = lambda_matrix_at_alpha_hat(0.0, 1);
        CHECK_FALSE(m.clamped);
        CHECK(m.l11 == 2.0);
    }
    SECTION("clamping kicks in at the k=1 boundary") {
        auto m = lambda_matrix_at_alpha_hat(0.4, 1, 1e-4);
        CHECK(m.clamped);
        CHECK(m.hurst == Catch::Approx(0.74));
        CHECK(m.truncation_j > 0);
        CHECK(m.tail_bound >= 0.0);
    }
    SECTION("pass-through inside the admissible range") {
        auto a = lambda_matrix_at_alpha_hat(-1.0 / 6.0, 2);
        auto b = lambda_matrix(1.0 / 3.0, 2);
        CHECK(a.l11 == Catch::Approx(b.l11).epsilon(1e-14));
        CHECK_FALSE(a.clamped);
    }
}
