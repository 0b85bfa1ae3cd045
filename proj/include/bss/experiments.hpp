#pragma once

// Monte Carlo harness reproducing the limit theorems at desk scale: LLN
// convergence tables, CLT normality tests with the theoretical covariance,
// confidence-interval coverage, and fBm-based checks of the Lambda matrix.
// Replications run in a work pool with hash-derived per-replication seeds
// and index-ordered reduction, so reports are byte-identical across runs
// and thread counts.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bss/common.hpp"
#include "bss/fbm_limits.hpp"
#include "bss/hf_statistics.hpp"
#include "bss/path_csv.hpp"
#include "bss/rng.hpp"
#include "bss/simulation.hpp"
#include "bss/version.hpp"
#include "bss/weight_spec_io.hpp"

namespace bss {

enum class ExperimentKind { Lln, Clt, Coverage, LambdaCheck };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Lln: return "lln";
        case ExperimentKind::Clt: return "clt";
        case ExperimentKind::Coverage: return "coverage";
        case ExperimentKind::LambdaCheck: return "lambda_check";
    }
    return "?";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "lln") return ExperimentKind::Lln;
    if (s == "clt") return ExperimentKind::Clt;
    if (s == "coverage") return ExperimentKind::Coverage;
    if (s == "lambda_check") return ExperimentKind::LambdaCheck;
    throw ValidationError("unknown experiment kind '" + s + "'");
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Lln;
    WeightSpec spec;
    IntermittencySpec sigma = ConstantSigma{1.0};
    int k = 2;
    std::vector<int> v_list{1};
    std::vector<double> delta_ladder{1.0 / 4096.0};
    double horizon = 1.0;
    double t = 1.0;
    std::size_t replications = 200;
    std::uint64_t master_seed = 1;
    double mu = 0.0;
    int kappa = 8;
    double t_cut = 8.0;
    int threads = 0; // 0 = all logical cores
};

struct ReplicationRow {
    std::size_t rep;
    double delta_n;
    int v;
    double statistic_value;
    std::uint64_t seed;
};

struct ExperimentReport {
    nlohmann::json doc;
    std::vector<ReplicationRow> rows;

    // canonical bytes with volatile metadata removed (determinism checks)
    std::string stable_bytes() const {
        nlohmann::json j = doc;
        if (j.contains("metadata")) j["metadata"].erase("wall_time_s");
        return j.dump(2);
    }
};

// --- basic sample statistics ---------------------------------------------

namespace stat {

inline double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / double(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / double(v.size() - 1);
}

inline double se_of_mean(const std::vector<double>& v) {
    return std::sqrt(variance(v) / double(v.size()));
}

// standard error of the sample variance via the fourth central moment
inline double se_of_variance(const std::vector<double>& v) {
    const double m = mean(v);
    const double s2 = variance(v);
    double m4 = 0.0;
    for (double x : v) m4 += std::pow(x - m, 4.0);
    m4 /= double(v.size());
    const double n = double(v.size());
    return std::sqrt(std::max(0.0, m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n);
}

inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
    return acc / double(a.size() - 1);
}

inline double se_of_covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    const double c = covariance(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (a[i] - ma) * (b[i] - mb) - c;
        acc += d * d;
    }
    return std::sqrt(acc / double(a.size())) / std::sqrt(double(a.size()));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace stat

// One-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
// (Kolmogorov series, 100 terms). Requires at least 8 observations.
template <class Cdf>
std::pair<double, double> ks_statistic(std::vector<double> sample, const Cdf& cdf) {
    if (sample.size() < 8) throw ValidationError("KS test needs at least 8 observations");
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
    }
    const double z = std::sqrt(n) * d;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j)
        p += (j % 2 ? 2.0 : -2.0) * std::exp(-2.0 * double(j) * double(j) * z * z);
    return {d, std::clamp(p, 0.0, 1.0)};
}

namespace detail {

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    int T = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    if (T < 1) T = 1;
    T = std::min<int>(T, int(n) > 0 ? int(n) : 1);
    if (T == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(T));
    for (int t = 0; t < T; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = std::size_t(t); i < n; i += std::size_t(T)) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.replications == 0) throw ValidationError("experiment needs at least one replication");
    if (cfg.delta_ladder.empty()) throw ValidationError("experiment needs a delta_n ladder");
    for (double d : cfg.delta_ladder)
        if (!(d > 0.0)) throw ValidationError("delta_n values must be positive");
    if (!(cfg.t > 0.0) || cfg.t > cfg.horizon + 1e-12)
        throw ValidationError("statistic horizon t must lie in (0, horizon]");
    if (cfg.kind == ExperimentKind::Clt || cfg.kind == ExperimentKind::Coverage) {
        throw_if_invalid(cfg.spec);
        auto summary = summarize_smoothness(cfg.spec);
        if (!(cfg.t < cfg.spec.min_spacing()))
            throw ValidationError("CLT-grade experiments need t below the minimal singularity "
                                  "spacing");
        if (cfg.k == 1 && !summary.clt_k1_ok)
            throw ValidationError("the k=1 CLT needs all exponents negative");
        if (!summary.robustness_ok)
            throw ValidationError("inactive exponents violate the robustness gap > 1/4");
        if (!sigma_clt_compliant(cfg.sigma))
            throw ValidationError("CLT-grade experiments need constant or smooth deterministic "
                                  "intermittency");
    }
    if (cfg.kind == ExperimentKind::Lln || cfg.kind == ExperimentKind::LambdaCheck)
        throw_if_invalid(cfg.spec);
    for (int v : cfg.v_list)
        if (v != 1 && v != 2) throw ValidationError("frequencies must be 1 or 2");
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["kind"] = to_string(cfg.kind);
    j["k"] = cfg.k;
    j["v"] = cfg.v_list;
    j["delta_n"] = cfg.delta_ladder;
    j["horizon"] = cfg.horizon;
    j["t"] = cfg.t;
    j["replications"] = cfg.replications;
    j["master_seed"] = cfg.master_seed;
    j["sigma"] = sigma_to_string(cfg.sigma);
    j["mu"] = cfg.mu;
    j["kappa"] = cfg.kappa;
    j["t_cut"] = cfg.t_cut;
    j["spec_toml"] = weight_spec_to_toml_string(cfg.spec);
    return j;
}

inline nlohmann::json metadata_json(double wall_seconds, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["master_seed"] = cfg.master_seed;
    j["version"] = std::string(BSSHF_VERSION) + "+" + BSSHF_BUILD_HASH;
    j["wall_time_s"] = wall_seconds;
    return j;
}

struct ScopedTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline BssSampler make_sampler(const ExperimentConfig& cfg, double delta_n) {
    GridSpec grid{delta_n, cfg.horizon, cfg.kappa, cfg.t_cut};
    return BssSampler(cfg.spec, cfg.mu, cfg.sigma, grid);
}

} // namespace detail

// --- LLN ------------------------------------------------------------------

inline ExperimentReport run_lln(const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    detail::ScopedTimer timer;
    ExperimentReport report;
    std::optional<double> limit;
    if (sigma_is_deterministic(cfg.sigma)) limit = limit_qv(cfg.spec, cfg.sigma, cfg.k, cfg.t);

    nlohmann::json rows = nlohmann::json::array();
    for (double delta : cfg.delta_ladder) {
        auto sampler = detail::make_sampler(cfg, delta);
        std::vector<double> tau2(cfg.v_list.size());
        for (std::size_t vi = 0; vi < cfg.v_list.size(); ++vi)
            tau2[vi] = tau_sq(cfg.spec, cfg.k, cfg.v_list[vi], delta).tau_sq_exact;
        std::vector<std::vector<double>> values(cfg.v_list.size(),
                                                std::vector<double>(cfg.replications));
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, r);
            try {
                auto path = sampler.sample(seed);
                for (std::size_t vi = 0; vi < cfg.v_list.size(); ++vi)
                    values[vi][r] =
                        scaled_qv_with_tau(path, tau2[vi], cfg.k, cfg.v_list[vi], cfg.t);
            } catch (const std::exception& e) {
                throw NumericalError("run_lln", "replication " + std::to_string(r) + " (seed " +
                                                    std::to_string(seed) + ") failed: " + e.what());
            }
        });
        for (std::size_t vi = 0; vi < cfg.v_list.size(); ++vi) {
            nlohmann::json row;
            row["delta_n"] = delta;
            row["v"] = cfg.v_list[vi];
            row["mean"] = stat::mean(values[vi]);
            row["se"] = stat::se_of_mean(values[vi]);
            if (limit) {
                row["limit"] = *limit;
                row["bias"] = stat::mean(values[vi]) - *limit;
            }
            rows.push_back(row);
            for (std::size_t r = 0; r < cfg.replications; ++r)
                report.rows.push_back({r, delta, cfg.v_list[vi], values[vi][r],
                                       derive_seed(cfg.master_seed, r)});
        }
    }
    report.doc["kind"] = "lln";
    report.doc["config"] = detail::config_json(cfg);
    report.doc["rows"] = rows;
    report.doc["metadata"] = detail::metadata_json(timer.seconds(), cfg);
    return report;
}

// --- CLT ------------------------------------------------------------------

inline ExperimentReport run_clt(const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    detail::ScopedTimer timer;
    ExperimentReport report;
    const double limit = limit_qv(cfg.spec, cfg.sigma, cfg.k, cfg.t);
    const double weight = limit_variance_weight(cfg.spec, cfg.sigma, cfg.k, cfg.t);
    auto summary = summarize_smoothness(cfg.spec);
    auto lambda = lambda_matrix(summary.alpha_min + 0.5, cfg.k);

    nlohmann::json rows = nlohmann::json::array();
    report.doc["kind"] = "clt";
    report.doc["config"] = detail::config_json(cfg);
    report.doc["theory"] = {{"limit", limit},
                            {"variance_weight", weight},
                            {"lambda", {{"l11", lambda.l11}, {"l12", lambda.l12}, {"l22", lambda.l22}}}};

    for (double delta : cfg.delta_ladder) {
        auto sampler = detail::make_sampler(cfg, delta);
        const double tau2_1 = tau_sq(cfg.spec, cfg.k, 1, delta).tau_sq_exact;
        const double tau2_2 = tau_sq(cfg.spec, cfg.k, 2, delta).tau_sq_exact;
        std::vector<double> u1(cfg.replications), u2(cfg.replications);
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, r);
            try {
                auto path = sampler.sample(seed);
                const double s1 = scaled_qv_with_tau(path, tau2_1, cfg.k, 1, cfg.t);
                const double s2 = scaled_qv_with_tau(path, tau2_2, cfg.k, 2, cfg.t);
                u1[r] = (s1 - limit) / std::sqrt(delta);
                u2[r] = (s2 - limit) / std::sqrt(delta);
            } catch (const std::exception& e) {
                throw NumericalError("run_clt", "replication " + std::to_string(r) + " (seed " +
                                                    std::to_string(seed) + ") failed: " + e.what());
            }
        });
        nlohmann::json row;
        row["delta_n"] = delta;
        if (cfg.replications < 8) {
            row["insufficient_sample"] = true;
        } else {
            const double var1 = weight * lambda.l11;
            const double var2 = weight * lambda.l22;
            auto [d1, p1] = ks_statistic(u1, [&](double x) {
                return stat::normal_cdf(x / std::sqrt(var1));
            });
            auto [d2, p2] = ks_statistic(u2, [&](double x) {
                return stat::normal_cdf(x / std::sqrt(var2));
            });
            row["ks"] = {{"v1", {{"statistic", d1}, {"p_value", p1}, {"theory_var", var1}}},
                         {"v2", {{"statistic", d2}, {"p_value", p2}, {"theory_var", var2}}}};
            row["empirical"] = {{"var_v1", stat::variance(u1)},
                                {"var_v1_se", stat::se_of_variance(u1)},
                                {"var_v2", stat::variance(u2)},
                                {"var_v2_se", stat::se_of_variance(u2)},
                                {"cov", stat::covariance(u1, u2)},
                                {"cov_se", stat::se_of_covariance(u1, u2)},
                                {"theory_cov", weight * lambda.l12}};
            bool cov_ok = true;
            cov_ok &= std::fabs(stat::variance(u1) - var1) <= 3.0 * stat::se_of_variance(u1);
            cov_ok &= std::fabs(stat::variance(u2) - var2) <= 3.0 * stat::se_of_variance(u2);
            cov_ok &= std::fabs(stat::covariance(u1, u2) - weight * lambda.l12) <=
                      3.0 * stat::se_of_covariance(u1, u2);
            row["covariance_within_3se"] = cov_ok;
        }
        rows.push_back(row);
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            report.rows.push_back({r, delta, 1, u1[r], derive_seed(cfg.master_seed, r)});
            report.rows.push_back({r, delta, 2, u2[r], derive_seed(cfg.master_seed, r)});
        }
    }
    report.doc["rows"] = rows;
    report.doc["metadata"] = detail::metadata_json(timer.seconds(), cfg);
    return report;
}

// --- coverage ---------------------------------------------------------------

inline ExperimentReport run_coverage(const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    detail::ScopedTimer timer;
    ExperimentReport report;
    auto summary = summarize_smoothness(cfg.spec);
    const double true_alpha = summary.alpha_min;

    nlohmann::json rows = nlohmann::json::array();
    for (double delta : cfg.delta_ladder) {
        auto sampler = detail::make_sampler(cfg, delta);
        const double tau2_1 = tau_sq(cfg.spec, cfg.k, 1, delta).tau_sq_exact;
        std::vector<double> tstats(cfg.replications), covered(cfg.replications);
        std::vector<double> qq_scaled(cfg.replications);
        EstimateOptions opt;
        opt.null_alpha = true_alpha;
        opt.known_spec = cfg.spec;
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, r);
            try {
                auto path = sampler.sample(seed);
                auto est = estimate_alpha(path, cfg.k, cfg.t, opt);
                tstats[r] = *est.t_stat;
                covered[r] =
                    (est.ci_95.lower <= true_alpha && true_alpha <= est.ci_95.upper) ? 1.0 : 0.0;
                qq_scaled[r] = delta * est.qq_1 / (tau2_1 * tau2_1);
            } catch (const std::exception& e) {
                throw NumericalError("run_coverage", "replication " + std::to_string(r) +
                                                         " (seed " + std::to_string(seed) +
                                                         ") failed: " + e.what());
            }
        });
        nlohmann::json row;
        row["delta_n"] = delta;
        const double cov = stat::mean(covered);
        row["coverage"] = cov;
        row["coverage_se"] = std::sqrt(cov * (1.0 - cov) / double(cfg.replications));
        row["true_alpha"] = true_alpha;
        row["qq_scaled_mean"] = stat::mean(qq_scaled);
        row["qq_scaled_se"] = stat::se_of_mean(qq_scaled);
        row["qq_limit"] = 3.0 * limit_variance_weight(cfg.spec, cfg.sigma, cfg.k, cfg.t);
        if (cfg.replications >= 8) {
            auto [d, p] = ks_statistic(tstats, stat::normal_cdf);
            row["ks_feasible"] = {{"statistic", d}, {"p_value", p}};
        } else {
            row["insufficient_sample"] = true;
        }
        rows.push_back(row);
        for (std::size_t r = 0; r < cfg.replications; ++r)
            report.rows.push_back({r, delta, 1, tstats[r], derive_seed(cfg.master_seed, r)});
    }
    report.doc["kind"] = "coverage";
    report.doc["config"] = detail::config_json(cfg);
    report.doc["rows"] = rows;
    report.doc["metadata"] = detail::metadata_json(timer.seconds(), cfg);
    return report;
}

// --- fBm lambda check --------------------------------------------------------

inline ExperimentReport run_lambda_check(const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    detail::ScopedTimer timer;
    ExperimentReport report;
    auto summary = summarize_smoothness(cfg.spec);
    const double hurst = summary.alpha_min + 0.5;
    auto lambda = lambda_matrix(hurst, cfg.k);

    nlohmann::json rows = nlohmann::json::array();
    for (double delta : cfg.delta_ladder) {
        const std::size_t n = static_cast<std::size_t>(std::floor(cfg.t / delta + 1e-9));
        FbmSampler sampler(hurst, n, delta);
        const double tau2_1 = fbm_filter_variance(hurst, cfg.k, 1) * std::pow(delta, 2.0 * hurst);
        const double tau2_2 = fbm_filter_variance(hurst, cfg.k, 2) * std::pow(delta, 2.0 * hurst);
        std::vector<double> u1(cfg.replications), u2(cfg.replications);
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, r);
            auto path = sampler.sample(seed);
            u1[r] = delta / tau2_1 * qv(path, cfg.k, 1).value / std::sqrt(delta);
            u2[r] = delta / tau2_2 * qv(path, cfg.k, 2).value / std::sqrt(delta);
        });
        nlohmann::json row;
        row["delta_n"] = delta;
        row["hurst"] = hurst;
        row["theory"] = {{"l11", lambda.l11}, {"l12", lambda.l12}, {"l22", lambda.l22}};
        row["empirical"] = {{"var_v1", stat::variance(u1)},
                            {"var_v1_se", stat::se_of_variance(u1)},
                            {"var_v2", stat::variance(u2)},
                            {"var_v2_se", stat::se_of_variance(u2)},
                            {"cov", stat::covariance(u1, u2)},
                            {"cov_se", stat::se_of_covariance(u1, u2)}};
        row["within_3se"] =
            std::fabs(stat::variance(u1) - cfg.t * lambda.l11) <= 3.0 * stat::se_of_variance(u1) &&
            std::fabs(stat::variance(u2) - cfg.t * lambda.l22) <= 3.0 * stat::se_of_variance(u2) &&
            std::fabs(stat::covariance(u1, u2) - cfg.t * lambda.l12) <=
                3.0 * stat::se_of_covariance(u1, u2);
        rows.push_back(row);
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            report.rows.push_back({r, delta, 1, u1[r], derive_seed(cfg.master_seed, r)});
            report.rows.push_back({r, delta, 2, u2[r], derive_seed(cfg.master_seed, r)});
        }
    }
    report.doc["kind"] = "lambda_check";
    report.doc["config"] = detail::config_json(cfg);
    report.doc["rows"] = rows;
    report.doc["metadata"] = detail::metadata_json(timer.seconds(), cfg);
    return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::Lln: return run_lln(cfg);
        case ExperimentKind::Clt: return run_clt(cfg);
        case ExperimentKind::Coverage: return run_coverage(cfg);
        case ExperimentKind::LambdaCheck: return run_lambda_check(cfg);
    }
    throw ValidationError("unknown experiment kind");
}

// --- config parsing and report output ---------------------------------------

inline ExperimentConfig experiment_config_from_toml(const toml::Table& t,
                                                    const std::string& base_dir = ".") {
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(toml::require(t, "kind").as_string());
    cfg.k = toml::get_or(t, "k", 2);
    if (auto it = t.find("v"); it != t.end()) {
        cfg.v_list.clear();
        for (const auto& v : it->second.array()) cfg.v_list.push_back(int(v.as_int()));
    }
    if (auto it = t.find("delta_n"); it != t.end()) {
        cfg.delta_ladder.clear();
        if (it->second.is_array())
            for (const auto& v : it->second.array()) cfg.delta_ladder.push_back(v.as_double());
        else
            cfg.delta_ladder.push_back(it->second.as_double());
    }
    cfg.horizon = toml::get_or(t, "horizon", 1.0);
    cfg.t = toml::get_or(t, "t", cfg.horizon);
    cfg.replications = std::size_t(toml::get_or<std::int64_t>(t, "replications", 200));
    cfg.master_seed = std::uint64_t(toml::get_or<std::int64_t>(t, "master_seed", 1));
    cfg.mu = toml::get_or(t, "mu", 0.0);
    cfg.kappa = toml::get_or(t, "kappa", 8);
    cfg.t_cut = toml::get_or(t, "t_cut", 8.0);
    cfg.sigma = parse_sigma(toml::get_or<std::string>(t, "sigma", "constant:1.0"));
    if (auto it = t.find("spec"); it != t.end()) {
        cfg.spec = weight_spec_from_toml(it->second.table());
    } else if (auto p = t.find("spec_path"); p != t.end()) {
        cfg.spec = load_weight_spec(base_dir + "/" + p->second.as_string());
    } else {
        throw ValidationError("experiment config needs [spec] or spec_path");
    }
    return cfg;
}

inline std::string replications_csv(const ExperimentReport& report) {
    std::string out = "rep,delta_n,v,statistic_value,seed\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.rep);
        out += ',';
        out += shortest_double(row.delta_n);
        out += ',';
        out += std::to_string(row.v);
        out += ',';
        out += shortest_double(row.statistic_value);
        out += ',';
        out += std::to_string(row.seed);
        out += '\n';
    }
    return out;
}

inline void write_report(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/report.json", std::ios::binary);
        if (!out) throw ValidationError("cannot write report to '" + dir + "'");
        out << report.doc.dump(2) << "\n";
    }
    {
        std::ofstream out(dir + "/replications.csv", std::ios::binary);
        out << replications_csv(report);
    }
}

} // namespace bss
