#pragma once

// Weight functions g for moving-average kernels with power-type
// singularities: evaluation, k-th order filters, structural validation,
// and the smoothness summary (minimal exponent and its active set).
//
// A SingularKernel g is |x-theta_i|^{alpha_i} f_i(x) inside each
// half-width window, blends smoothly (C-infinity) to an exponentially
// decaying baseline between windows and beyond the last one, and is 0
// for x <= 0. An IndicatorSum g is a finite sum of scaled interval
// indicators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bss/common.hpp"
#include "bss/quadrature.hpp"

namespace bss {

enum class WeightKind { SingularKernel, IndicatorSum };

struct SingularitySegment {
    double theta = 0.0;
    double alpha = 0.0;                  // in (-1/2,0) U (0,1/2)
    std::vector<double> f_coeffs{1.0};   // polynomial in (x - theta), constant term first
    double half_width = 0.5;
};

struct IndicatorTerm {
    double coeff = 1.0;
    double lower = 0.0;
    double upper = 1.0;
};

struct WeightSpec {
    WeightKind kind = WeightKind::SingularKernel;
    std::vector<SingularitySegment> segments;
    double tail_rate = 1.0;
    int max_filter_order = 3;
    std::vector<IndicatorTerm> indicator_terms;

    // Minimal spacing between consecutive singularities; +inf when l = 0
    // or for indicator kernels (no constraint).
    double min_spacing() const {
        if (kind != WeightKind::SingularKernel || segments.size() < 2) return kInf;
        double m = kInf;
        for (std::size_t i = 1; i < segments.size(); ++i)
            m = std::min(m, segments[i].theta - segments[i - 1].theta);
        return m;
    }
};

struct Diagnostic {
    std::string code;
    std::string message;
};

struct SmoothnessSummary {
    double alpha_min = 0.0;
    std::vector<std::size_t> active_set;
    bool robustness_ok = true; // alpha_i - alpha > 1/4 for all inactive i
    bool clt_k1_ok = true;     // all alpha_j < 0 (needed only for the k=1 CLT)
};

namespace detail {

inline double poly_eval(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
    return acc;
}

inline double power_form(const SingularitySegment& s, double x) {
    const double t = x - s.theta;
    return std::pow(std::fabs(t), s.alpha) * poly_eval(s.f_coeffs, t);
}

// Exponential baseline for the gap to the right of segment `i`, anchored at
// that window's right edge so its scale matches the local kernel values.
// Each gap's blend passes through the pure baseline only in the gap interior,
// so per-gap amplitudes keep g C-infinity globally.
inline double baseline(const WeightSpec& spec, std::size_t i, double x) {
    const auto& seg = spec.segments[i];
    const double edge = seg.theta + seg.half_width;
    return power_form(seg, edge) * std::exp(-spec.tail_rate * (x - edge));
}

} // namespace detail

// g(theta_i + t) with the offset supplied exactly. Inside segment i's window
// the power form is evaluated from t directly, so no precision is lost to the
// subtraction x - theta_i; this matters for quadrature close to strong
// singularities. Falls back to the generic path outside the window.
inline double eval_g(const WeightSpec& spec, double x);

inline double eval_g_near(const WeightSpec& spec, std::size_t segment, double t) {
    const auto& s = spec.segments[segment];
    if (std::fabs(t) <= s.half_width) {
        if (s.theta == 0.0 && t <= 0.0) return 0.0; // support starts at 0
        if (t == 0.0) return 0.0;                   // pointwise convention g(theta_i) = 0
        return std::pow(std::fabs(t), s.alpha) * detail::poly_eval(s.f_coeffs, t);
    }
    return eval_g(spec, s.theta + t);
}

inline double eval_g(const WeightSpec& spec, double x) {
    if (x <= 0.0) return 0.0;
    if (spec.kind == WeightKind::IndicatorSum) {
        double acc = 0.0;
        for (const auto& t : spec.indicator_terms)
            if (x > t.lower && x <= t.upper) acc += t.coeff;
        return acc;
    }
    const auto& segs = spec.segments;
    const std::size_t l = segs.size() - 1;
    for (std::size_t i = 0; i <= l; ++i) {
        const auto& s = segs[i];
        if (i >= 1 && x == s.theta) return 0.0; // pointwise convention g(theta_i) = 0
        if (x >= s.theta - s.half_width && x <= s.theta + s.half_width)
            return detail::power_form(s, x);
    }
    // between windows: power -> baseline on the first half of the gap,
    // baseline -> next power on the second half
    for (std::size_t i = 0; i < l; ++i) {
        const double right = segs[i].theta + segs[i].half_width;
        const double left_next = segs[i + 1].theta - segs[i + 1].half_width;
        if (x > right && x < left_next) {
            const double mid = 0.5 * (right + left_next);
            if (x <= mid) {
                const double u = (x - right) / (mid - right);
                const double s = smooth01(u);
                return (1.0 - s) * detail::power_form(segs[i], x) + s * detail::baseline(spec, i, x);
            }
            const double u = (x - mid) / (left_next - mid);
            const double s = smooth01(u);
            return (1.0 - s) * detail::baseline(spec, i, x) + s * detail::power_form(segs[i + 1], x);
        }
    }
    // beyond the last window: blend to the pure exponential baseline
    const double tail_start = segs[l].theta + segs[l].half_width;
    const double blend_end = tail_start + segs[l].half_width;
    if (x < blend_end) {
        const double u = (x - tail_start) / (blend_end - tail_start);
        const double s = smooth01(u);
        return (1.0 - s) * detail::power_form(segs[l], x) + s * detail::baseline(spec, l, x);
    }
    return detail::baseline(spec, l, x);
}

// Point past which g is exactly the exponential baseline (or 0 for indicators).
inline double kernel_tail_start(const WeightSpec& spec) {
    if (spec.kind == WeightKind::IndicatorSum) {
        double m = 0.0;
        for (const auto& t : spec.indicator_terms) m = std::max(m, t.upper);
        return m;
    }
    const auto& last = spec.segments.back();
    return last.theta + 2.0 * last.half_width;
}

// Structural points of g with the local exponent of g itself
// (alpha_i at singularities, 0 at window edges / blend midpoints /
// indicator jump locations).
struct KernelPoint {
    double x;
    double exponent; // 0 for plain mesh points
};

inline std::vector<KernelPoint> kernel_points(const WeightSpec& spec) {
    std::vector<KernelPoint> pts;
    pts.push_back({0.0, 0.0});
    if (spec.kind == WeightKind::IndicatorSum) {
        for (const auto& t : spec.indicator_terms) {
            pts.push_back({t.lower, 0.0});
            pts.push_back({t.upper, 0.0});
        }
        return pts;
    }
    const std::size_t l = spec.segments.size() - 1;
    for (std::size_t i = 0; i <= l; ++i) {
        const auto& s = spec.segments[i];
        pts.push_back({s.theta, s.alpha});
        pts.push_back({s.theta - s.half_width, 0.0});
        pts.push_back({s.theta + s.half_width, 0.0});
        if (i < l) {
            const double mid = 0.5 * (s.theta + s.half_width + spec.segments[i + 1].theta -
                                      spec.segments[i + 1].half_width);
            pts.push_back({mid, 0.0});
        }
    }
    pts.push_back({kernel_tail_start(spec), 0.0});
    return pts;
}

// Breakpoints for integrating g(x)^2, with exact-offset local evaluators at
// the singular points. The integrand exponent at theta_i is 2 alpha_i for
// alpha_i < 0 (the square dominates) and alpha_i for alpha_i > 0 (the kink).
inline std::vector<quad::Breakpoint> g_squared_breakpoints(const WeightSpec& spec) {
    std::vector<quad::Breakpoint> bps;
    if (spec.kind == WeightKind::IndicatorSum) {
        for (const auto& p : kernel_points(spec)) bps.push_back({p.x, 0.0});
        return bps;
    }
    for (const auto& p : kernel_points(spec)) {
        if (p.exponent == 0.0) {
            bps.push_back({p.x, 0.0});
            continue;
        }
        // locate the segment this point belongs to
        std::size_t idx = 0;
        for (std::size_t i = 0; i < spec.segments.size(); ++i)
            if (spec.segments[i].theta == p.x) idx = i;
        const double e = p.exponent < 0.0 ? 2.0 * p.exponent : p.exponent;
        bps.push_back({p.x, e, [&spec, idx](double s) {
                           const double v = eval_g_near(spec, idx, s);
                           return v * v;
                       }});
    }
    return bps;
}

inline void require_filter_args(const WeightSpec& spec, int k, int v) {
    if (k < 1 || k > spec.max_filter_order)
        throw ValidationError("filter order k must satisfy 1 <= k <= max_filter_order (" +
                              std::to_string(spec.max_filter_order) + "), got " + std::to_string(k));
    if (v != 1 && v != 2) throw ValidationError("frequency multiplier v must be 1 or 2");
}

inline double filtered_g(const WeightSpec& spec, int k, int v, double delta_n, double x) {
    require_filter_args(spec, k, v);
    return apply_filter([&spec](double y) { return eval_g(spec, y); }, k, v, delta_n, x);
}

inline SmoothnessSummary summarize_smoothness(const WeightSpec& spec) {
    if (spec.kind != WeightKind::SingularKernel)
        throw ValidationError("smoothness summary is undefined for indicator kernels");
    SmoothnessSummary out;
    out.alpha_min = kInf;
    for (const auto& s : spec.segments) out.alpha_min = std::min(out.alpha_min, s.alpha);
    constexpr double tol = 1e-12; // exponents are exact user inputs
    for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        const double a = spec.segments[i].alpha;
        if (std::fabs(a - out.alpha_min) <= tol) out.active_set.push_back(i);
        else if (a - out.alpha_min <= 0.25) out.robustness_ok = false;
        if (a >= 0.0) out.clt_k1_ok = false;
    }
    return out;
}

namespace detail {

// One-sided m-th derivative continuity probe at a window edge. The blend is
// C-infinity by construction, so a genuine mismatch means the spec produced
// a jump/kink (e.g. zero-length gap between touching windows). Probes sit a
// few steps off the edge; for a C^{m+1} function they differ by about
// 8h g^{(m+1)}, which the tolerance absorbs via a one-sided estimate of the
// next derivative.
inline double fd_derivative(const WeightSpec& spec, double center, int order, double h) {
    static const double w1[] = {-0.5, 0.0, 0.5};
    static const double w2[] = {1.0, -2.0, 1.0};
    static const double w3[] = {-0.5, 1.0, 0.0, -1.0, 0.5};
    static const double w4[] = {1.0, -4.0, 6.0, -4.0, 1.0};
    double acc = 0.0;
    switch (order) {
        case 0: return eval_g(spec, center);
        case 1:
            for (int i = -1; i <= 1; ++i) acc += w1[i + 1] * eval_g(spec, center + i * h);
            break;
        case 2:
            for (int i = -1; i <= 1; ++i) acc += w2[i + 1] * eval_g(spec, center + i * h);
            break;
        case 3:
            for (int i = -2; i <= 2; ++i) acc += w3[i + 2] * eval_g(spec, center + i * h);
            break;
        default:
            for (int i = -2; i <= 2; ++i) acc += w4[i + 2] * eval_g(spec, center + i * h);
            break;
    }
    return acc / std::pow(h, order);
}

inline bool derivative_matches(const WeightSpec& spec, double edge, int order, double h) {
    const double offset = 4.0 * h;
    const double dl = fd_derivative(spec, edge - offset, order, h);
    const double dr = fd_derivative(spec, edge + offset, order, h);
    const double next = std::max(std::fabs(fd_derivative(spec, edge - 2.0 * offset, order + 1, h)),
                                 std::fabs(fd_derivative(spec, edge + 2.0 * offset, order + 1, h)));
    const double scale = std::max({std::fabs(dl), std::fabs(dr), 1e-8});
    const double roundoff = 2e-13 * (std::fabs(eval_g(spec, edge)) + 1.0) / std::pow(h, order);
    const double tol = 0.05 * scale + 4.0 * (2.0 * offset) * next + roundoff;
    return std::fabs(dl - dr) <= tol;
}

} // namespace detail

inline std::vector<Diagnostic> validate(const WeightSpec& spec) {
    std::vector<Diagnostic> out;
    auto add = [&out](std::string code, std::string msg) {
        out.push_back({std::move(code), std::move(msg)});
    };

    if (spec.kind == WeightKind::IndicatorSum) {
        if (spec.indicator_terms.empty()) add("indicator_empty", "indicator kernel has no terms");
        double prev_hi = -kInf;
        for (std::size_t i = 0; i < spec.indicator_terms.size(); ++i) {
            const auto& t = spec.indicator_terms[i];
            if (!(t.lower < t.upper))
                add("indicator_order", "interval " + std::to_string(i) + " is empty or reversed");
            if (t.lower < 0.0)
                add("indicator_order", "interval " + std::to_string(i) + " starts before 0");
            if (t.lower < prev_hi)
                add("indicator_order", "interval " + std::to_string(i) + " overlaps its predecessor");
            prev_hi = t.upper;
        }
        if (spec.max_filter_order < 1) add("max_filter_order", "max_filter_order must be >= 1");
        return out;
    }

    if (spec.segments.empty()) {
        add("segments_empty", "singular kernel needs at least one segment");
        return out;
    }
    if (spec.segments.front().theta != 0.0)
        add("theta0", "first singularity must sit at 0");
    for (std::size_t i = 1; i < spec.segments.size(); ++i)
        if (!(spec.segments[i].theta > spec.segments[i - 1].theta))
            add("ordering", "singularity locations must be strictly increasing (index " +
                                std::to_string(i) + ")");
    const double spacing = spec.min_spacing();
    for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        const auto& s = spec.segments[i];
        if (!(s.half_width > 0.0))
            add("half_width", "segment " + std::to_string(i) + " needs a positive half_width");
        else if (s.half_width > 0.5 * spacing)
            add("half_width", "segment " + std::to_string(i) +
                                  " half_width exceeds half the minimal spacing");
        const double aa = std::fabs(s.alpha);
        if (!(aa > 0.0) || !(aa < 0.5))
            add("exponent_range", "segment " + std::to_string(i) +
                                      " exponent must lie in (-1/2,0) U (0,1/2)");
        if (s.f_coeffs.empty() || s.f_coeffs[0] == 0.0)
            add("f_nonzero", "segment " + std::to_string(i) + " needs f(theta) != 0");
        if (s.f_coeffs.size() > 7)
            add("f_degree", "segment " + std::to_string(i) + " smooth factor degree exceeds 6");
    }
    if (spec.max_filter_order < 1 || spec.max_filter_order > 12)
        add("max_filter_order", "max_filter_order must lie in [1, 12]");
    if (!(spec.tail_rate > 0.0)) add("tail_rate", "tail_rate must be positive");
    if (!out.empty()) return out; // structural failures make the numeric checks meaningless

    // g(x) = 0 for x <= 0, evaluated
    for (double x : {-1.0, -0.25, -1e-9, 0.0})
        if (eval_g(spec, x) != 0.0) add("support", "g does not vanish at x <= 0");

    // square integrability, checked numerically
    try {
        auto bps = g_squared_breakpoints(spec);
        quad::Options opt;
        opt.rel_tol = 1e-8;
        opt.label = "validate.g_norm";
        const double tail_start = kernel_tail_start(spec);
        auto g2 = quad::integrate([&spec](double x) { double v = eval_g(spec, x); return v * v; },
                                  0.0, tail_start, bps, opt);
        auto tail = quad::integrate_exp_tail(
            [&spec](double x) { double v = eval_g(spec, x); return v * v; }, tail_start,
            2.0 * spec.tail_rate, {}, opt);
        if (!std::isfinite(g2.value + tail.value))
            add("square_integrability", "numerical L2 norm of g is not finite");
    } catch (const NumericalError& e) {
        add("square_integrability", e.what());
    }

    // C^k continuity probe at window boundaries
    const int orders = std::min(spec.max_filter_order, 3);
    for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        const auto& s = spec.segments[i];
        const double h = 1e-3 * s.half_width;
        for (double edge : {s.theta - s.half_width, s.theta + s.half_width}) {
            if (edge <= 0.0) continue;
            for (int m = 0; m <= orders; ++m) {
                if (!detail::derivative_matches(spec, edge, m, h)) {
                    add("smoothness", "derivative order " + std::to_string(m) +
                                          " mismatch at window edge x=" + std::to_string(edge));
                    break;
                }
            }
        }
    }
    return out;
}

inline void throw_if_invalid(const WeightSpec& spec) {
    auto diags = validate(spec);
    if (diags.empty()) return;
    std::string msg = "invalid weight spec:";
    for (const auto& d : diags) msg += " [" + d.code + "] " + d.message + ";";
    throw ValidationError(msg);
}

inline WeightSpec make_singular_spec(std::vector<SingularitySegment> segments, double tail_rate = 1.0,
                                     int max_filter_order = 3) {
    WeightSpec spec;
    spec.kind = WeightKind::SingularKernel;
    std::sort(segments.begin(), segments.end(),
              [](const SingularitySegment& a, const SingularitySegment& b) { return a.theta < b.theta; });
    spec.segments = std::move(segments);
    spec.tail_rate = tail_rate;
    spec.max_filter_order = max_filter_order;
    throw_if_invalid(spec);
    return spec;
}

inline WeightSpec make_indicator_spec(std::vector<IndicatorTerm> terms, int max_filter_order = 3) {
    WeightSpec spec;
    spec.kind = WeightKind::IndicatorSum;
    std::sort(terms.begin(), terms.end(),
              [](const IndicatorTerm& a, const IndicatorTerm& b) { return a.lower < b.lower; });
    spec.indicator_terms = std::move(terms);
    spec.max_filter_order = max_filter_order;
    throw_if_invalid(spec);
    return spec;
}

// g = 1_[0,1], the classical two-atom example.
inline WeightSpec unit_indicator_spec(int max_filter_order = 3) {
    return make_indicator_spec({{1.0, 0.0, 1.0}}, max_filter_order);
}

} // namespace bss
