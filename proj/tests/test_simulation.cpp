#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "bss/fbm_limits.hpp"
#include "bss/simulation.hpp"

using namespace bss;

namespace {

WeightSpec single_spec(double alpha = -1.0 / 6.0) {
    return make_singular_spec({{0.0, alpha, {1.0}, 0.75}}, 2.0, 3);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / double(v.size() - 1);
}

} // namespace

TEST_CASE("determinism: same seed, same bytes") {
    auto spec = single_spec();
    GridSpec grid{1.0 / 64.0, 0.5, 4, 4.0};
    auto a = simulate_gaussian_core(spec, grid, 20240811ULL);
    auto b = simulate_gaussian_core(spec, grid, 20240811ULL);
    REQUIRE(a.values == b.values); // bit-exact
    auto c = simulate_gaussian_core(spec, grid, 20240812ULL);
    CHECK(a.values != c.values);

    auto r1 = simulate_bss(spec, 0.3, TrigPolySigma{1.0, {}, {0.5}}, grid, 7ULL);
    auto r2 = simulate_bss(spec, 0.3, TrigPolySigma{1.0, {}, {0.5}}, grid, 7ULL);
    REQUIRE(r1.values == r2.values);
    REQUIRE(*r1.sigma_values == *r2.sigma_values);

    auto f1 = simulate_fbm(1.0 / 3.0, 128, 1.0 / 128.0, 99ULL);
    auto f2 = simulate_fbm(1.0 / 3.0, 128, 1.0 / 128.0, 99ULL);
    REQUIRE(f1.values == f2.values);
}

TEST_CASE("path length follows the grid") {
    auto spec = single_spec();
    GridSpec grid{1.0 / 64.0, 1.0, 4, 4.0};
    auto p = simulate_gaussian_core(spec, grid, 1ULL);
    CHECK(p.values.size() == 65);
    auto f = simulate_fbm(0.5, 100, 0.01, 1ULL);
    CHECK(f.values.size() == 101);
    CHECK(f.values[0] == 0.0);
}

TEST_CASE("fbm increment statistics") {
    SECTION("H = 1/2 increments are white") {
        auto p = simulate_fbm(0.5, 20000, 1.0, 5ULL);
        std::vector<double> inc(p.values.size() - 1);
        for (std::size_t i = 0; i + 1 < p.values.size(); ++i) inc[i] = p.values[i + 1] - p.values[i];
        const double m = mean_of(inc);
        double c1 = 0.0, c0 = 0.0;
        for (std::size_t i = 0; i + 1 < inc.size(); ++i) c1 += (inc[i] - m) * (inc[i + 1] - m);
        for (double x : inc) c0 += (x - m) * (x - m);
        CHECK(std::fabs(c1 / c0) < 4.0 / std::sqrt(double(inc.size())));
    }
    SECTION("H = 1/3 lag-1 autocorrelation matches rho") {
        auto p = simulate_fbm(1.0 / 3.0, 20000, 1.0, 6ULL);
        std::vector<double> inc(p.values.size() - 1);
        for (std::size_t i = 0; i + 1 < p.values.size(); ++i) inc[i] = p.values[i + 1] - p.values[i];
        const double m = mean_of(inc);
        double c1 = 0.0, c0 = 0.0;
        for (std::size_t i = 0; i + 1 < inc.size(); ++i) c1 += (inc[i] - m) * (inc[i + 1] - m);
        for (double x : inc) c0 += (x - m) * (x - m);
        const double target = rho(1.0 / 3.0, 1, 1, 1, 1);
        CHECK(c1 / c0 == Catch::Approx(target).margin(4.0 / std::sqrt(double(inc.size()))));
    }
    SECTION("single increment variance is step^2H") {
        const double step = 0.25;
        const double hurst = 0.7;
        FbmSampler sampler(hurst, 1, step);
        std::vector<double> draws;
        for (std::uint64_t r = 0; r < 4000; ++r) draws.push_back(sampler.sample(1000 + r).values[1]);
        const double target = std::pow(step, 2.0 * hurst);
        const double se = target * std::sqrt(2.0 / double(draws.size() - 1));
        CHECK(var_of(draws) == Catch::Approx(target).margin(4.0 * se));
    }
}

TEST_CASE("gaussian core marginals and correlation") {
    auto spec = single_spec();
    auto ck = covariance_kernel(spec, {0.0, 0.5}, 1e-8);
    const double g2 = ck.g_norm_sq;

    GridSpec grid{0.5, 1.0, 1, 4.0}; // three points per path: lags 0, 0.5, 1.0
    GaussianCoreSampler sampler(spec, grid);
    std::vector<double> x0, x1;
    const std::size_t reps = 10000;
    for (std::size_t r = 0; r < reps; ++r) {
        auto p = sampler.sample(40000 + r);
        x0.push_back(p.values[0]);
        x1.push_back(p.values[1]);
    }
    SECTION("zero mean") {
        const double se = std::sqrt(g2 / double(reps));
        CHECK(std::fabs(mean_of(x0)) < 4.0 * se);
    }
    SECTION("variance equals ||g||^2") {
        const double se = g2 * std::sqrt(2.0 / double(reps - 1));
        CHECK(var_of(x0) == Catch::Approx(g2).margin(4.0 * se));
    }
    SECTION("lag correlation matches the covariance kernel") {
        const double m0 = mean_of(x0), m1 = mean_of(x1);
        double num = 0.0, d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < reps; ++i) {
            num += (x0[i] - m0) * (x1[i] - m1);
            d0 += (x0[i] - m0) * (x0[i] - m0);
            d1 += (x1[i] - m1) * (x1[i] - m1);
        }
        CHECK(num / std::sqrt(d0 * d1) ==
              Catch::Approx(ck.r(0.5)).margin(4.0 / std::sqrt(double(reps))));
    }
}

TEST_CASE("gaussian core stationarity across window positions") {
    auto spec = single_spec();
    GridSpec grid{1.0 / 32.0, 4.0, 1, 4.0};
    GaussianCoreSampler sampler(spec, grid);
    const std::size_t reps = 800;
    const std::size_t lag = 8;
    std::vector<double> cov_early, cov_late;
    for (std::size_t r = 0; r < reps; ++r) {
        auto p = sampler.sample(777000 + r);
        const auto& v = p.values;
        cov_early.push_back(v[4] * v[4 + lag]);
        cov_late.push_back(v[96] * v[96 + lag]);
    }
    const double se = std::sqrt(var_of(cov_early) / double(reps) + var_of(cov_late) / double(reps));
    CHECK(std::fabs(mean_of(cov_early) - mean_of(cov_late)) < 4.0 * se);
}

TEST_CASE("indicator kernel core has the triangular correlation") {
    auto ind = unit_indicator_spec();
    GridSpec grid{0.5, 1.0, 1, 2.0};
    GaussianCoreSampler sampler(ind, grid);
    const std::size_t reps = 10000;
    double num = 0.0, d0 = 0.0, d1 = 0.0;
    std::vector<double> a, b;
    for (std::size_t r = 0; r < reps; ++r) {
        auto p = sampler.sample(91000 + r);
        a.push_back(p.values[0]);
        b.push_back(p.values[1]);
    }
    const double ma = mean_of(a), mb = mean_of(b);
    for (std::size_t i = 0; i < reps; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        d0 += (a[i] - ma) * (a[i] - ma);
        d1 += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(num / std::sqrt(d0 * d1) == Catch::Approx(0.5).margin(4.0 / std::sqrt(double(reps))));
}

TEST_CASE("bss with zero intermittency is the constant mu") {
    auto spec = single_spec();
    GridSpec grid{1.0 / 32.0, 0.5, 4, 4.0};
    auto p = simulate_bss(spec, 1.25, ConstantSigma{0.0}, grid, 3ULL);
    for (double v : p.values) CHECK(v == 1.25);
    auto q = simulate_bss(spec, -2.0, ConstantSigma{0.0}, grid, 3ULL, SimulationMethod::Riemann);
    for (double v : q.values) CHECK(v == -2.0);
}

TEST_CASE("riemann scheme variance approaches c^2 ||g||^2") {
    auto spec = single_spec();
    auto ck = covariance_kernel(spec, {0.0}, 1e-8);
    const double c = 1.7;
    const double target = c * c * ck.g_norm_sq;
    GridSpec grid{1.0 / 64.0, 0.25, 8, 6.0};
    BssSampler sampler(spec, 0.0, ConstantSigma{c}, grid, SimulationMethod::Riemann);
    std::vector<double> vals;
    const std::size_t reps = 3000;
    for (std::size_t r = 0; r < reps; ++r) vals.push_back(sampler.sample(52000 + r).values.back());
    const double se = target * std::sqrt(2.0 / double(reps - 1));
    // truncation plus cell-discretization bias stays inside the MC band
    CHECK(var_of(vals) == Catch::Approx(target).margin(4.0 * se + 0.01 * target));
}

TEST_CASE("riemann marginal matches the exact gaussian core distribution") {
    // KS test on the terminal marginal against N(0, ||g||^2)
    auto spec = single_spec();
    auto ck = covariance_kernel(spec, {0.0}, 1e-8);
    const double sd = std::sqrt(ck.g_norm_sq);
    GridSpec grid{1.0 / 64.0, 0.25, 8, 6.0};
    BssSampler sampler(spec, 0.0, ConstantSigma{1.0}, grid, SimulationMethod::Riemann);
    std::vector<double> vals;
    const std::size_t reps = 1000;
    for (std::size_t r = 0; r < reps; ++r) vals.push_back(sampler.sample(36000 + r).values.back());
    std::sort(vals.begin(), vals.end());
    double dstat = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        const double f = 0.5 * std::erfc(-vals[i] / (sd * std::sqrt(2.0)));
        dstat = std::max(dstat, std::max(f - double(i) / reps, double(i + 1) / reps - f));
    }
    // 1% asymptotic critical value 1.63 / sqrt(n), padded for discretization bias
    CHECK(dstat < 1.75 / std::sqrt(double(reps)));
}

TEST_CASE("refinement consistency: doubling kappa stays within the MC band") {
    auto spec = single_spec();
    const std::size_t reps = 400;
    auto qv_stats = [&](int kappa) {
        GridSpec grid{1.0 / 128.0, 0.25, kappa, 6.0};
        BssSampler sampler(spec, 0.0, TrigPolySigma{1.0, {}, {0.5}}, grid);
        std::vector<double> qvs;
        for (std::size_t r = 0; r < reps; ++r) {
            auto p = sampler.sample(61000 + r);
            double qv = 0.0;
            for (std::size_t i = 1; i < p.values.size(); ++i) {
                const double d = p.values[i] - p.values[i - 1];
                qv += d * d;
            }
            qvs.push_back(qv);
        }
        return std::pair<double, double>(mean_of(qvs), std::sqrt(var_of(qvs) / double(reps)));
    };
    const auto [m8, se8] = qv_stats(8);
    const auto [m16, se16] = qv_stats(16);
    CHECK(std::fabs(m16 - m8) < 3.0 * std::sqrt(se8 * se8 + se16 * se16));
}

TEST_CASE("truncation consistency: doubling T_cut moves the variance < 1%") {
    // the driving noise is drawn from the horizon backwards, so both runs
    // share the same draws on the common memory cells
    auto spec = single_spec();
    const std::size_t reps = 1500;
    auto var_at = [&](double tcut) {
        GridSpec grid{1.0 / 64.0, 0.25, 8, tcut};
        BssSampler sampler(spec, 0.0, TrigPolySigma{1.0, {}, {0.25}}, grid);
        std::vector<double> vals;
        for (std::size_t r = 0; r < reps; ++r) vals.push_back(sampler.sample(73000 + r).values.back());
        return var_of(vals);
    };
    const double v1 = var_at(4.0);
    const double v2 = var_at(8.0);
    CHECK(std::fabs(v2 - v1) / v1 < 0.01);
}

TEST_CASE("expou intermittency is flagged non-compliant and simulates") {
    CHECK_FALSE(sigma_clt_compliant(ExpOuSigma{}));
    CHECK(sigma_clt_compliant(TrigPolySigma{}));
    CHECK(sigma_clt_compliant(ConstantSigma{}));
    auto spec = single_spec();
    GridSpec grid{1.0 / 32.0, 0.25, 4, 4.0};
    auto p = simulate_bss(spec, 0.0, ExpOuSigma{2.0, 0.5, 0.0}, grid, 11ULL);
    CHECK(p.values.size() == 9);
    REQUIRE(p.sigma_values.has_value());
    for (double s : *p.sigma_values) CHECK(s > 0.0);
}

TEST_CASE("sigma spec string round-trip") {
    auto s1 = parse_sigma("constant:2.5");
    CHECK(sigma_value(s1, 3.0) == 2.5);
    auto s2 = parse_sigma("trig:1,0,0.5");
    CHECK(sigma_value(s2, 0.7) == Catch::Approx(1.0 + 0.5 * std::sin(0.7)));
    auto s3 = parse_sigma(sigma_to_string(s2));
    CHECK(sigma_value(s3, 0.7) == sigma_value(s2, 0.7));
    CHECK_THROWS_AS(parse_sigma("weird:1"), ValidationError);
    CHECK_THROWS_AS(sigma_value(parse_sigma("expou:1,0.5,0"), 1.0), ValidationError);
}

TEST_CASE("grid guards") {
    auto spec = single_spec();
    CHECK_THROWS_AS(simulate_gaussian_core(spec, GridSpec{1e-9, 100.0, 1, 4.0}, 1ULL),
                    ValidationError);
    CHECK_THROWS_AS(simulate_bss(spec, 0.0, ConstantSigma{1.0}, GridSpec{0.01, 1.0, 4, 0.5}, 1ULL),
                    ValidationError); // truncation below the singularity window
}
