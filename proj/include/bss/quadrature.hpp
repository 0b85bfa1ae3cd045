#pragma once

// Adaptive Gauss-Kronrod quadrature for integrands with known power-type
// singularities and kinks. The mesh is pre-split at every supplied
// breakpoint; a panel touching a point where the integrand behaves like
// |x - x0|^e gets a change of variables that makes the transformed
// integrand bounded (e < 0) or C^2 (0 < e < 1) before the adaptive
// bisection runs. Exponents must be > -1 (integrable).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

#include "bss/common.hpp"

namespace bss::quad {

struct Breakpoint {
    double x;
    double exponent = 0.0; // local integrand ~ |x - x0|^exponent; 0 = plain mesh point
    // Optional exact-offset evaluator: local(s) == f(x + s), computed without
    // forming x + s - x. Near a strong singularity the subtraction x - x0
    // inside a generic f loses all precision once |s| ~ 1e-12; an anchored
    // evaluator keeps the transformed integrand analytic to machine accuracy.
    std::function<double(double)> local;
};

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;   // absolute floor for the stopping test
    int max_panels = 60000;
    const char* label = "integrate";
};

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

namespace detail {

// QUADPACK 7-15 Gauss-Kronrod nodes and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kWgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679,  0.1903505780647854,  0.2044329400752989, 0.2094821410847278};
inline constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct PanelEval {
    double value = 0.0;
    double error = 0.0;
    bool finite = true;
};

template <class F>
PanelEval gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    int bad = 0;
    for (int i = 0; i < 7; ++i) {
        fv[2 * i] = f(c - h * kXgk[i]);
        fv[2 * i + 1] = f(c + h * kXgk[i]);
    }
    fv[14] = f(c);
    double resk = kWgk[7] * fv[14];
    double resg = kWg[3] * fv[14];
    double resabs = kWgk[7] * std::fabs(fv[14]);
    for (int i = 0; i < 7; ++i) {
        const double s = fv[2 * i] + fv[2 * i + 1];
        resk += kWgk[i] * s;
        resabs += kWgk[i] * (std::fabs(fv[2 * i]) + std::fabs(fv[2 * i + 1]));
        if (i % 2 == 1) resg += kWg[i / 2] * s;
    }
    for (double v : fv) bad += !std::isfinite(v);
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::fabs(fv[14] - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += kWgk[i] * (std::fabs(fv[2 * i] - reskh) + std::fabs(fv[2 * i + 1] - reskh));
    PanelEval out;
    out.finite = (bad == 0);
    out.value = resk * h;
    double err = std::fabs((resk - resg) * h);
    resasc *= std::fabs(h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    err = std::max(err, 5e-17 * resabs * std::fabs(h));
    out.error = out.finite ? err : kInf;
    return out;
}

// One transformed subinterval; the adaptive loop bisects in u-space.
struct Region {
    std::function<double(double)> integrand; // already includes the Jacobian
    double ua, ub;
    double min_width; // do not bisect below this
};

template <class F>
void add_region(std::vector<Region>& out, const F& f, double p, double q, double ep, double eq,
                const std::function<double(double)>& lp, const std::function<double(double)>& lq) {
    if (!(q > p)) return;
    if (ep != 0.0 && eq != 0.0) {
        const double mid = 0.5 * (p + q);
        add_region(out, f, p, mid, ep, 0.0, lp, {});
        add_region(out, f, mid, q, 0.0, eq, {}, lq);
        return;
    }
    const double len = q - p;
    Region r;
    const bool left = (ep != 0.0);
    const double e = left ? ep : eq;
    const std::function<double(double)>& local = left ? lp : lq;
    // evaluate at signed offset s from the singular endpoint
    auto eval_off = [f, p, q, left, local](double t) {
        if (local) return local(left ? t : -t);
        return f(left ? p + t : q - t);
    };
    if (e < 0.0) {
        // u = t^{e+1}/(e+1) with t the distance to the singular endpoint:
        // transformed integrand f * t^{-e} is bounded.
        const double e1 = e + 1.0;
        const double tfloor = len * 1e-250;
        r.ua = 0.0;
        r.ub = std::pow(len, e1) / e1;
        r.integrand = [eval_off, e, e1, tfloor](double u) {
            double t = std::pow(e1 * u, 1.0 / e1);
            if (t < tfloor) t = tfloor;
            return eval_off(t) * std::pow(t, -e);
        };
    } else if (e > 0.0 && e < 1.0) {
        // cubic grading softens a |t|^e kink (0<e<1) to C^2.
        r.ua = 0.0;
        r.ub = 1.0;
        r.integrand = [eval_off, len](double w) {
            const double t = len * w * w * w;
            return eval_off(t) * 3.0 * len * w * w;
        };
    } else {
        r.ua = p;
        r.ub = q;
        r.integrand = [f](double x) { return f(x); };
    }
    r.min_width = (r.ub - r.ua) * 0x1p-48;
    out.push_back(std::move(r));
}

struct HeapPanel {
    double a, b, value, error;
    std::size_t region;
    bool operator<(const HeapPanel& o) const { return error < o.error; }
};

inline Result run_adaptive(const std::vector<Region>& regions, const Options& opt) {
    std::priority_queue<HeapPanel> heap;
    double total = 0.0, toterr = 0.0;
    long evals = 0;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto pe = gk15(regions[i].integrand, regions[i].ua, regions[i].ub);
        evals += 15;
        total += pe.value;
        toterr += pe.error;
        heap.push({regions[i].ua, regions[i].ub, pe.value, pe.error, i});
    }
    int panels = static_cast<int>(regions.size());
    while (toterr > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total)) && !heap.empty()) {
        if (panels >= opt.max_panels)
            throw NumericalError(opt.label, "quadrature tolerance not reached within panel budget");
        HeapPanel top = heap.top();
        heap.pop();
        const Region& rg = regions[top.region];
        if (top.b - top.a <= rg.min_width) {
            // refuse to split further; error on this sliver is what it is
            if (heap.empty() || heap.top().error <= 0.0) break;
            continue;
        }
        const double m = 0.5 * (top.a + top.b);
        const auto l = gk15(rg.integrand, top.a, m);
        const auto r = gk15(rg.integrand, m, top.b);
        evals += 30;
        total += l.value + r.value - top.value;
        toterr += l.error + r.error - top.error;
        heap.push({top.a, m, l.value, l.error, top.region});
        heap.push({m, top.b, r.value, r.error, top.region});
        ++panels;
    }
    if (!(toterr <= std::max(opt.abs_tol, std::fabs(total) * opt.rel_tol * 4.0)) || !std::isfinite(total))
        throw NumericalError(opt.label, "quadrature did not converge");
    return {total, toterr, evals};
}

} // namespace detail

// Merge breakpoints that coincide (within a relative tolerance); exponents add,
// which is the correct local behaviour for products of two singular factors.
// Local evaluators describe the full integrand, so at most one survives a
// merge; builders that foresee coincidences should emit a single combined
// breakpoint themselves.
inline std::vector<Breakpoint> merge_breakpoints(std::vector<Breakpoint> pts, double scale) {
    std::sort(pts.begin(), pts.end(), [](const Breakpoint& l, const Breakpoint& r) { return l.x < r.x; });
    std::vector<Breakpoint> out;
    const double eps = 1e-13 * std::max(scale, 1.0);
    for (auto& p : pts) {
        if (!out.empty() && std::fabs(p.x - out.back().x) <= eps) {
            out.back().exponent += p.exponent;
            if (!out.back().local && p.local) out.back().local = std::move(p.local);
        } else {
            out.push_back(std::move(p));
        }
    }
    return out;
}

// Integrate f over [a, b]. Breakpoints outside (a, b) are dropped except that
// an exponent sitting exactly on a or b marks that endpoint as singular.
template <class F>
Result integrate(const F& f, double a, double b, std::vector<Breakpoint> breakpoints, Options opt = {}) {
    if (!(b > a)) return {};
    breakpoints.push_back({a, 0.0});
    breakpoints.push_back({b, 0.0});
    auto pts = merge_breakpoints(std::move(breakpoints), std::fabs(b - a) + std::fabs(a));
    std::vector<Breakpoint> kept;
    for (auto& p : pts) {
        if (p.x < a - 1e-13 * std::max(1.0, std::fabs(a)) || p.x > b + 1e-13 * std::max(1.0, std::fabs(b)))
            continue;
        p.x = std::clamp(p.x, a, b);
        kept.push_back(std::move(p));
    }
    std::vector<detail::Region> regions;
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
        if (kept[i + 1].x - kept[i].x <= 0.0) continue;
        detail::add_region(regions, f, kept[i].x, kept[i + 1].x, kept[i].exponent,
                           kept[i + 1].exponent, kept[i].local, kept[i + 1].local);
    }
    if (regions.empty()) return {};
    return detail::run_adaptive(regions, opt);
}

// Integrate f over [a, inf) where |f(x)| <= C e^{-rate (x-a)} eventually.
// Windows are extended until the sampled magnitude certifies the remainder.
template <class F>
Result integrate_exp_tail(const F& f, double a, double rate, std::vector<Breakpoint> breakpoints,
                          Options opt = {}) {
    if (!(rate > 0.0)) throw NumericalError(opt.label, "exponential tail needs a positive rate");
    double window = std::max(30.0 / rate, 1.0);
    Result acc{};
    double lo = a;
    for (int ext = 0; ext < 24; ++ext) {
        const double hi = lo + window;
        auto part = integrate(f, lo, hi, breakpoints, opt);
        acc.value += part.value;
        acc.error_estimate += part.error_estimate;
        acc.evaluations += part.evaluations;
        // probe the magnitude near the middle and the far end of the window;
        // the remainder bound only counts once the observed decay sustains at
        // least half the claimed rate
        double m_mid = 0.0, m_end = 0.0;
        for (double frac : {0.45, 0.5, 0.55}) m_mid = std::max(m_mid, std::fabs(f(lo + frac * window)));
        for (double frac : {0.90, 0.95, 1.0}) m_end = std::max(m_end, std::fabs(f(lo + frac * window)));
        const bool decaying = m_end <= m_mid * std::exp(-0.25 * rate * window) || m_end == 0.0;
        const double bound = 2.0 * m_end / rate; // integral of m_end * e^{-rate (x-hi)/2}
        if (decaying && (m_end == 0.0 ||
                         bound <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(acc.value)))) {
            acc.error_estimate += bound;
            return acc;
        }
        lo = hi;
        window *= 2.0;
    }
    throw NumericalError(opt.label, "exponential tail did not decay within the window budget");
}

} // namespace bss::quad
