#pragma once

// TOML round-trip for weight specs.
//
// kind = "singular_kernel" | "indicator_sum"
// tail_rate, max_filter_order at top level; one [[segments]] table per
// singularity {theta, alpha, f_coeffs, half_width}, or [[indicators]]
// tables {coeff, lower, upper} for indicator kernels.

#include <fstream>
#include <sstream>
#include <string>

#include "bss/toml_lite.hpp"
#include "bss/weight_model.hpp"

namespace bss {

inline toml::Table weight_spec_to_toml(const WeightSpec& spec) {
    toml::Table t;
    t["kind"] = spec.kind == WeightKind::SingularKernel ? "singular_kernel" : "indicator_sum";
    t["max_filter_order"] = spec.max_filter_order;
    if (spec.kind == WeightKind::SingularKernel) {
        t["tail_rate"] = spec.tail_rate;
        toml::Array segs;
        for (const auto& s : spec.segments) {
            toml::Table st;
            st["theta"] = s.theta;
            st["alpha"] = s.alpha;
            toml::Array fc;
            for (double c : s.f_coeffs) fc.push_back(c);
            st["f_coeffs"] = std::move(fc);
            st["half_width"] = s.half_width;
            segs.push_back(std::move(st));
        }
        t["segments"] = std::move(segs);
    } else {
        toml::Array terms;
        for (const auto& it : spec.indicator_terms) {
            toml::Table tt;
            tt["coeff"] = it.coeff;
            tt["lower"] = it.lower;
            tt["upper"] = it.upper;
            terms.push_back(std::move(tt));
        }
        t["indicators"] = std::move(terms);
    }
    return t;
}

inline std::string weight_spec_to_toml_string(const WeightSpec& spec) {
    return toml::emit(weight_spec_to_toml(spec));
}

// Parses and validates; throws ValidationError with the diagnostics on failure.
inline WeightSpec weight_spec_from_toml(const toml::Table& t) {
    WeightSpec spec;
    const std::string kind = toml::require(t, "kind").as_string();
    if (kind == "singular_kernel") spec.kind = WeightKind::SingularKernel;
    else if (kind == "indicator_sum") spec.kind = WeightKind::IndicatorSum;
    else throw ValidationError("unknown weight-spec kind '" + kind + "'");
    spec.max_filter_order = toml::get_or(t, "max_filter_order", 3);
    if (spec.kind == WeightKind::SingularKernel) {
        spec.tail_rate = toml::get_or(t, "tail_rate", 1.0);
        const auto& segs = toml::require(t, "segments").array();
        for (const auto& sv : segs) {
            const auto& st = sv.table();
            SingularitySegment s;
            s.theta = toml::require(st, "theta").as_double();
            s.alpha = toml::require(st, "alpha").as_double();
            s.half_width = toml::require(st, "half_width").as_double();
            s.f_coeffs.clear();
            for (const auto& c : toml::require(st, "f_coeffs").array())
                s.f_coeffs.push_back(c.as_double());
            spec.segments.push_back(std::move(s));
        }
        std::sort(spec.segments.begin(), spec.segments.end(),
                  [](const SingularitySegment& a, const SingularitySegment& b) {
                      return a.theta < b.theta;
                  });
    } else {
        const auto& terms = toml::require(t, "indicators").array();
        for (const auto& tv : terms) {
            const auto& tt = tv.table();
            spec.indicator_terms.push_back({toml::require(tt, "coeff").as_double(),
                                            toml::require(tt, "lower").as_double(),
                                            toml::require(tt, "upper").as_double()});
        }
        std::sort(spec.indicator_terms.begin(), spec.indicator_terms.end(),
                  [](const IndicatorTerm& a, const IndicatorTerm& b) { return a.lower < b.lower; });
    }
    throw_if_invalid(spec);
    return spec;
}

inline WeightSpec weight_spec_from_toml_string(const std::string& text) {
    return weight_spec_from_toml(toml::parse(text));
}

inline WeightSpec load_weight_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open weight spec file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return weight_spec_from_toml_string(ss.str());
}

} // namespace bss
