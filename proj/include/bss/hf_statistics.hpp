#pragma once

// Observable statistics of a sampled path: k-th order filtered differences
// at two frequencies, realised quadratic variation and quarticity, scaled
// versions against tau^2, the deterministic LLN limit, and the smoothness
// estimator alpha_hat with its feasible standardized statistic and
// confidence interval.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "bss/common.hpp"
#include "bss/fbm_limits.hpp"
#include "bss/limit_quantities.hpp"
#include "bss/quadrature.hpp"
#include "bss/simulation.hpp"
#include "bss/weight_model.hpp"

namespace bss {

struct QVResult {
    double value = 0.0;
    int k = 1;
    int v = 1;
    double delta_n = 0.0;
    std::size_t n_terms = 0;
    std::optional<std::vector<double>> as_process; // partial sums per index
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct EstimationResult {
    double alpha_hat = 0.0;
    double s_n = 0.0; // QV(2 delta)/QV(delta)
    QVResult qv_1;
    QVResult qv_2;
    double qq_1 = 0.0;
    std::optional<double> t_stat; // present in test mode (null alpha supplied)
    ConfidenceInterval ci_95;
    LambdaMatrix lambda_used;
    bool clamped = false;
    bool horizon_unchecked = false; // no spec supplied, CLT horizon not verified
};

// k-th order alternating binomial differences at frequency v * delta_n,
// indexed i = vk .. floor(t_used / delta_n).
inline std::vector<double> kth_differences(const PathSample& path, int k, int v,
                                           std::optional<double> t_used = {}) {
    if (k < 1) throw ValidationError("filter order must be >= 1");
    if (v != 1 && v != 2) throw ValidationError("frequency multiplier must be 1 or 2");
    std::size_t last = path.values.size() - 1;
    if (t_used) {
        if (*t_used > path.grid.horizon + 1e-12)
            throw ValidationError("t_used exceeds the path horizon");
        last = static_cast<std::size_t>(std::floor(*t_used / path.grid.delta_n + 1e-9));
        last = std::min(last, path.values.size() - 1);
    }
    const std::size_t lead = static_cast<std::size_t>(v) * static_cast<std::size_t>(k);
    if (path.values.size() <= lead) throw ValidationError("path too short for the requested filter");
    if (last < lead) throw ValidationError("t_used too small for the requested filter");
    const auto w = filter_weights(k);
    std::vector<double> out;
    out.reserve(last - lead + 1);
    for (std::size_t i = lead; i <= last; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j)
            acc += w[static_cast<std::size_t>(j)] *
                   path.values[i - static_cast<std::size_t>(v) * static_cast<std::size_t>(j)];
        out.push_back(acc);
    }
    return out;
}

inline QVResult qv(const PathSample& path, int k, int v, std::optional<double> t_used = {},
                   bool with_process = false) {
    auto d = kth_differences(path, k, v, t_used);
    QVResult out;
    out.k = k;
    out.v = v;
    out.delta_n = path.grid.delta_n;
    out.n_terms = d.size();
    if (with_process) out.as_process = std::vector<double>();
    double acc = 0.0;
    for (double x : d) {
        acc += x * x;
        if (with_process) out.as_process->push_back(acc);
    }
    out.value = acc;
    return out;
}

inline double qq(const PathSample& path, int k, int v, std::optional<double> t_used = {}) {
    auto d = kth_differences(path, k, v, t_used);
    double acc = 0.0;
    for (double x : d) acc += (x * x) * (x * x);
    return acc;
}

// Delta_n / tau_k(v Delta_n)^2 * QV, with tau^2 from exact quadrature or the
// asymptotic power law.
inline double scaled_qv(const PathSample& path, const WeightSpec& spec, int k, int v,
                        bool use_asymptotic_tau = false, std::optional<double> t_used = {}) {
    auto q = qv(path, k, v, t_used);
    auto ts = tau_sq(spec, k, v, path.grid.delta_n);
    const double tau2 = use_asymptotic_tau ? ts.tau_sq_asymptotic : ts.tau_sq_exact;
    return path.grid.delta_n / tau2 * q.value;
}

// same, with a precomputed tau^2 (Monte Carlo loops reuse one quadrature)
inline double scaled_qv_with_tau(const PathSample& path, double tau2, int k, int v,
                                 std::optional<double> t_used = {}) {
    auto q = qv(path, k, v, t_used);
    return path.grid.delta_n / tau2 * q.value;
}

// The LLN limit: sum over the pi_k atoms of int_{-theta}^{t-theta} sigma^2.
inline double limit_qv(const WeightSpec& spec, const IntermittencySpec& sigma, int k, double t,
                       double rel_tol = 1e-10) {
    if (!sigma_is_deterministic(sigma))
        throw ValidationError("the LLN limit needs a deterministic intermittency");
    if (!(t > 0.0)) throw ValidationError("horizon must be positive");
    if (const auto* c = std::get_if<ConstantSigma>(&sigma)) return c->value * c->value * t;
    auto measure = pi_k(spec, k);
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.label = "limit_qv";
    double acc = 0.0;
    for (std::size_t i = 0; i < measure.support.size(); ++i) {
        const double theta = measure.support[i];
        auto r = quad::integrate(
            [&sigma](double s) {
                const double v = sigma_value(sigma, s);
                return v * v;
            },
            -theta, t - theta, {}, opt);
        acc += measure.weights[i] * r.value;
    }
    return acc;
}

// integral of (sum_i pi_i sigma^2(s - theta_i))^2 over [0, t]: the variance
// weight of the CLT limit (and 1/3 of the quarticity limit integrand)
inline double limit_variance_weight(const WeightSpec& spec, const IntermittencySpec& sigma, int k,
                                    double t, double rel_tol = 1e-10) {
    if (!sigma_is_deterministic(sigma))
        throw ValidationError("the CLT variance weight needs a deterministic intermittency");
    if (const auto* c = std::get_if<ConstantSigma>(&sigma)) {
        const double s2 = c->value * c->value;
        return s2 * s2 * t;
    }
    auto measure = pi_k(spec, k);
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.label = "limit_variance_weight";
    auto r = quad::integrate(
        [&](double s) {
            double acc = 0.0;
            for (std::size_t i = 0; i < measure.support.size(); ++i) {
                const double sv = sigma_value(sigma, s - measure.support[i]);
                acc += measure.weights[i] * sv * sv;
            }
            return acc * acc;
        },
        0.0, t, {}, opt);
    return r.value;
}

struct EstimateOptions {
    std::optional<double> null_alpha;    // test mode when set
    std::optional<WeightSpec> known_spec; // enables the CLT horizon check
    double lambda_rel_tol = 1e-8;
};

// Ratio estimator of the smoothness parameter with the feasible CLT pieces:
//   alpha_hat = (log2(QV_2/QV_1) - 1) / 2
//   T = 2 ln 2 * QV_1 * (alpha_hat - alpha_0) / sqrt(QQ_1/3 * (-1,1) L (-1,1)')
inline EstimationResult estimate_alpha(const PathSample& path, int k, double t_used,
                                       const EstimateOptions& options = {}) {
    if (!(t_used > 0.0)) throw ValidationError("t_used must be positive");
    if (t_used > path.grid.horizon + 1e-12)
        throw ValidationError("t_used exceeds the path horizon");
    EstimationResult out;
    if (options.known_spec) {
        const double spacing = options.known_spec->min_spacing();
        if (!(t_used < spacing))
            throw ValidationError("the CLT horizon requires t_used below the minimal "
                                  "singularity spacing");
    } else {
        out.horizon_unchecked = true;
    }
    out.qv_1 = qv(path, k, 1, t_used);
    out.qv_2 = qv(path, k, 2, t_used);
    out.qq_1 = qq(path, k, 1, t_used);
    if (out.qv_1.value < 1e-300 || out.qv_2.value < 1e-300)
        throw NumericalError("estimate_alpha", "degenerate path: realised variation is zero");
    out.s_n = out.qv_2.value / out.qv_1.value;
    out.alpha_hat = 0.5 * (std::log2(out.s_n) - 1.0);
    out.lambda_used = lambda_matrix_at_alpha_hat(out.alpha_hat, k, options.lambda_rel_tol);
    out.clamped = out.lambda_used.clamped;
    const double quad_form = out.lambda_used.ratio_form();
    const double denom = std::sqrt(out.qq_1 / 3.0 * quad_form);
    const double scale = 2.0 * std::log(2.0) * out.qv_1.value;
    if (options.null_alpha) out.t_stat = scale * (out.alpha_hat - *options.null_alpha) / denom;
    const double half_width = 1.959963984540054 * denom / scale;
    out.ci_95 = {out.alpha_hat - half_width, out.alpha_hat + half_width};
    return out;
}

} // namespace bss
