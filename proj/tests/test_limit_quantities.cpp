#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bss/limit_quantities.hpp"
#include "bss/weight_model.hpp"
#include "oracles.hpp"

using namespace bss;

namespace {

WeightSpec single_spec(double alpha, double hw = 0.75, int maxk = 3) {
    return make_singular_spec({{0.0, alpha, {1.0}, hw}}, 2.0, maxk);
}

WeightSpec two_active_spec(double alpha = -1.0 / 6.0, double theta1 = 2.0) {
    return make_singular_spec({{0.0, alpha, {1.0}, 0.75}, {theta1, alpha, {1.0}, 0.75}}, 2.0, 3);
}

// reference values computed with 40-digit arithmetic (independent of both
// the library quadrature and the brute-force oracle)
struct HNormRef {
    double alpha;
    int k;
    double one_sided;
    double interior;
};
constexpr HNormRef kHNormRefs[] = {
    {-0.4, 1, 7.8162180319775897, 10.801747647950274},
    {-1.0 / 6.0, 1, 1.6297768960289301, 0.43669740313385366},
    {0.2, 1, 0.83889297187184363, 0.3204286023316348},
    {0.4, 1, 1.5195745362088708, 2.1000003606018019},
    {-0.4, 2, 22.286395330174477, 30.799040833298059},
    {-1.0 / 6.0, 2, 3.9319980248859299, 1.0535756954089545},
    {0.2, 2, 1.141720062134013, 0.43609825809755121},
    {0.4, 2, 0.78683227096717094, 1.0873754550313658},
    {-0.4, 3, 73.109314329941549, 101.03458742216261},
    {-1.0 / 6.0, 3, 12.314068641668731, 3.2995447480765487},
    {0.2, 3, 3.2057806621215541, 1.2244992524532912},
    {0.4, 3, 2.0232535275896849, 2.796067607270841},
};

} // namespace

TEST_CASE("h_function pointwise") {
    auto spec = two_active_spec();
    SECTION("one-sided h_0 vanishes left of the support") {
        CHECK(h_function(spec, 0, 1, -1.0) == 0.0);
    }
    SECTION("interior h is antisymmetric around the k=1 midpoint") {
        auto s = make_singular_spec({{0.0, -0.3, {1.0}, 0.4}, {1.0, -0.2, {1.0}, 0.4}}, 2.0);
        CHECK(h_function(s, 1, 1, 0.5) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("scaling by f(theta)") {
        auto s = make_singular_spec({{0.0, 0.3, {2.0}, 0.75}}, 2.0);
        CHECK(h_function(s, 0, 1, 0.5) == Catch::Approx(2.0 * std::pow(0.5, 0.3)).epsilon(1e-14));
        CHECK(h_function(s, 0, 1, 0.5) == Catch::Approx(1.6245).margin(5e-5));
    }
    SECTION("index checking") {
        CHECK_THROWS_AS(h_function(spec, 5, 1, 0.5), ValidationError);
    }
}

TEST_CASE("h_norm_sq matches the graded-mesh oracle and the frozen references") {
    // spot-check a subset live against the brute-force oracle (the full
    // battery runs in the acceptance suite), plus frozen high-precision refs
    for (const auto& ref : {kHNormRefs[1], kHNormRefs[6], kHNormRefs[3]}) {
        auto spec = ref.alpha < 0.0 ? two_active_spec(ref.alpha) : [&] {
            return make_singular_spec(
                {{0.0, ref.alpha, {1.0}, 0.75}, {2.0, ref.alpha, {1.0}, 0.75}}, 2.0, 3);
        }();
        const double i0 = h_norm_sq(spec, 0, ref.k, 1e-8);
        const double i1 = h_norm_sq(spec, 1, ref.k, 1e-8);
        CAPTURE(ref.alpha, ref.k);
        CHECK(i0 == Catch::Approx(ref.one_sided).epsilon(2e-7));
        CHECK(i1 == Catch::Approx(ref.interior).epsilon(2e-7));
        auto oracle0 = oracle::h_norm_sq(ref.alpha, ref.k, true);
        auto oracle1 = oracle::h_norm_sq(ref.alpha, ref.k, false);
        CHECK(i0 == Catch::Approx(oracle0.value).epsilon(1e-6));
        CHECK(i1 == Catch::Approx(oracle1.value).epsilon(1e-6));
    }
}

TEST_CASE("h_norm_sq scales with f(theta)^2") {
    auto base = make_singular_spec({{0.0, -0.2, {1.0}, 0.75}}, 2.0);
    auto scaled = make_singular_spec({{0.0, -0.2, {3.0}, 0.75}}, 2.0);
    const double a = h_norm_sq(base, 0, 2);
    const double b = h_norm_sq(scaled, 0, 2);
    CHECK(b == Catch::Approx(9.0 * a).epsilon(1e-12));
    // frozen reference for (alpha=-0.2, k=1, one-sided)
    CHECK(h_norm_sq(base, 0, 1) == Catch::Approx(1.8750709111678687).epsilon(1e-7));
}

TEST_CASE("pi_k limit measure") {
    SECTION("single singularity carries all mass") {
        auto m = pi_k(single_spec(-1.0 / 6.0), 2);
        REQUIRE(m.support.size() == 1);
        CHECK(m.support[0] == 0.0);
        CHECK(m.weights[0] == Catch::Approx(1.0));
    }
    SECTION("inactive singularities are excluded") {
        auto spec = make_singular_spec({{0.0, -0.2, {1.0}, 0.75}, {2.0, 0.3, {1.0}, 0.75}}, 2.0);
        auto m = pi_k(spec, 1);
        REQUIRE(m.support == std::vector<double>{0.0});
        CHECK(m.weights[0] == Catch::Approx(1.0));
        CHECK(m.h_norms_sq.size() == 2); // inactive norm still reported
        CHECK(m.h_norms_sq[1] > 0.0);
    }
    SECTION("two active atoms split by their h norms") {
        auto spec = make_singular_spec({{0.0, -0.2, {1.0}, 0.75}, {2.0, -0.2, {1.0}, 0.75}}, 2.0);
        auto m = pi_k(spec, 1);
        REQUIRE(m.weights.size() == 2);
        const double w0 = 1.8750709111678687 / (1.8750709111678687 + 0.71621335674989106);
        CHECK(m.weights[0] == Catch::Approx(w0).epsilon(1e-7));
        CHECK(m.weights[0] + m.weights[1] == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("tau_sq for the unit indicator reproduces 2 delta") {
    auto ind = unit_indicator_spec();
    for (double d : {1e-2, 1e-3}) {
        auto r = tau_sq(ind, 1, 1, d, 1e-10);
        CHECK(r.tau_sq_exact == Catch::Approx(2.0 * d).epsilon(1e-10));
    }
}

TEST_CASE("tau_sq frequency scaling follows the power law") {
    auto spec = single_spec(-1.0 / 6.0);
    const double d = 1e-3;
    auto r1 = tau_sq(spec, 1, 1, d);
    auto r2 = tau_sq(spec, 1, 2, d);
    CHECK(r2.tau_sq_asymptotic / r1.tau_sq_asymptotic ==
          Catch::Approx(std::pow(2.0, 2.0 * (-1.0 / 6.0) + 1.0)).epsilon(1e-12));
    // the exact values approach the same ratio
    CHECK(r2.tau_sq_exact / r1.tau_sq_exact ==
          Catch::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(5e-3));
}

TEST_CASE("tau_sq exact/asymptotic ratio walks to 1 along a delta ladder") {
    auto spec = two_active_spec();
    double prev_gap = kInf;
    for (int m = 6; m <= 11; ++m) {
        const double d = std::pow(2.0, -m);
        auto r = tau_sq(spec, 1, 1, d);
        const double gap = std::fabs(r.tau_sq_exact / r.tau_sq_asymptotic - 1.0);
        CAPTURE(m, gap);
        CHECK(gap < prev_gap + 1e-9);
        prev_gap = gap;
    }
    CHECK(prev_gap < 5e-3);
}

TEST_CASE("tau_sq precondition on delta") {
    auto spec = two_active_spec(); // half width 0.75
    CHECK_THROWS_AS(tau_sq(spec, 3, 2, 0.2), ValidationError);
}

TEST_CASE("pi_n_measure") {
    SECTION("whole support normalizes to 1") {
        auto spec = two_active_spec();
        const double d = 1e-3;
        CHECK(pi_n_measure(spec, 2, 1, d, -1.0, 10.0) == Catch::Approx(1.0).margin(1e-8));
    }
    SECTION("indicator masses at the two edges") {
        auto ind = unit_indicator_spec();
        for (double d : {1e-2, 1e-3}) {
            CHECK(pi_n_measure(ind, 1, 1, d, -d, 0.0, 1e-10) == Catch::Approx(0.5).margin(1e-10));
            CHECK(pi_n_measure(ind, 1, 1, d, 1.0 - d, 1.0, 1e-10) ==
                  Catch::Approx(0.5).margin(1e-10));
        }
    }
    SECTION("additive over disjoint intervals and monotone") {
        auto spec = two_active_spec();
        const double d = 1e-3;
        const double whole = pi_n_measure(spec, 1, 1, d, -0.5, 2.5);
        const double left = pi_n_measure(spec, 1, 1, d, -0.5, 1.0);
        const double right = pi_n_measure(spec, 1, 1, d, 1.0, 2.5);
        CHECK(whole == Catch::Approx(left + right).margin(1e-8));
        CHECK(left <= whole + 1e-10);
    }
    SECTION("shrinking window around an active atom recovers its pi_k weight") {
        auto spec = two_active_spec();
        auto m = pi_k(spec, 1);
        const double d = 1e-5;
        const double mass = pi_n_measure(spec, 1, 1, d, 2.0 - 1e-2, 2.0 + 1e-2);
        CHECK(mass == Catch::Approx(m.weights[1]).margin(1e-3));
    }
}

TEST_CASE("covariance kernel") {
    SECTION("unit indicator has triangular correlation") {
        auto ind = unit_indicator_spec();
        auto ck = covariance_kernel(ind, {0.0, 0.25, 0.5, 0.75, 1.0, 1.5}, 1e-9);
        CHECK(ck.g_norm_sq == Catch::Approx(1.0).epsilon(1e-9));
        CHECK(ck.r(0.0) == 1.0);
        CHECK(ck.r(0.5) == Catch::Approx(0.5).epsilon(1e-9));
        CHECK(ck.r(1.0) == Catch::Approx(0.0).margin(1e-9));
        CHECK(ck.r(1.5) == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("variogram identity holds by construction") {
        auto spec = single_spec(-1.0 / 6.0);
        std::vector<double> grid;
        for (int i = 0; i <= 32; ++i) grid.push_back(i * 0.03125);
        auto ck = covariance_kernel(spec, grid, 1e-8);
        for (double t : {0.0, 0.25, 0.6184, 1.0}) {
            const double lhs = ck.R(t);
            const double rhs = 2.0 * ck.g_norm_sq * (1.0 - ck.r(t));
            CHECK(lhs == rhs); // exact: same expression
        }
        CHECK(std::fabs(ck.r(0.97)) <= 1.0);
    }
    SECTION("correlation bounds") {
        auto spec = two_active_spec();
        std::vector<double> grid;
        for (int i = 0; i <= 64; ++i) grid.push_back(i * 0.0625);
        auto ck = covariance_kernel(spec, grid, 1e-8);
        for (double rv : ck.r_values) CHECK(std::fabs(rv) <= 1.0 + 1e-12);
    }
    SECTION("lag at an exact singularity spacing (coinciding singular factors)") {
        auto spec = two_active_spec(-0.45, 2.0); // strong singularities
        auto ck = covariance_kernel(spec, {0.0, 2.0}, 1e-8);
        CHECK(std::isfinite(ck.r(2.0)));
        CHECK(ck.r(2.0) > 0.0); // overlapping singular humps correlate positively
    }
    SECTION("tau_sq agrees with the filter combination of covariance values") {
        auto spec = single_spec(-1.0 / 6.0);
        const double d = 0.01;
        const int k = 2;
        std::vector<double> grid;
        for (int m = 0; m <= 2 * k; ++m) grid.push_back(m * d);
        auto ck = covariance_kernel(spec, grid, 1e-10);
        double acc = 0.0;
        for (int a = 0; a <= k; ++a)
            for (int b = 0; b <= k; ++b)
                acc += (((a + b) % 2) ? -1.0 : 1.0) * binomial(k, a) * binomial(k, b) *
                       ck.g_norm_sq * ck.r(std::fabs(a - b) * d);
        auto ts = tau_sq(spec, k, 1, d, 1e-10);
        CHECK(ts.tau_sq_exact == Catch::Approx(acc).epsilon(1e-7));
    }
}
