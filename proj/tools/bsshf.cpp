// Command-line front end: `limits` (deterministic limit objects), `simulate`
// (path generation to CSV), `estimate` (smoothness estimation from a path
// CSV), `experiment` (Monte Carlo reproduction runs from a TOML config).
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bss/experiments.hpp"
#include "bss/fbm_limits.hpp"
#include "bss/hf_statistics.hpp"
#include "bss/limit_quantities.hpp"
#include "bss/path_csv.hpp"
#include "bss/simulation.hpp"
#include "bss/version.hpp"
#include "bss/weight_spec_io.hpp"

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string verbose; // "", "on", or "json"
};

void report_error(const GlobalFlags& g, const char* kind, const std::string& operation,
                  const std::string& message) {
    if (g.verbose == "json") {
        nlohmann::json j;
        j["error"] = {{"kind", kind}, {"operation", operation}, {"message", message}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error (" << kind << ")";
        if (!operation.empty()) std::cerr << " in " << operation;
        std::cerr << ": " << message << "\n";
    }
}

int run_limits(const GlobalFlags&, const std::string& spec_path, int k, std::vector<double> deltas,
               std::vector<int> vs, bool lambda_mode, double rel_tol) {
    auto spec = bss::load_weight_spec(spec_path);
    nlohmann::json out;
    if (lambda_mode) {
        auto summary = bss::summarize_smoothness(spec);
        auto lam = bss::lambda_matrix(summary.alpha_min + 0.5, k, rel_tol);
        out["H"] = lam.hurst;
        out["k"] = k;
        out["lambda"] = {{lam.l11, lam.l12}, {lam.l12, lam.l22}};
        out["truncation_j"] = lam.truncation_j;
        out["tail_bound"] = lam.tail_bound;
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    auto summary = bss::summarize_smoothness(spec);
    auto measure = bss::pi_k(spec, k, rel_tol);
    out["alpha"] = summary.alpha_min;
    out["active_set"] = summary.active_set;
    out["robustness_ok"] = summary.robustness_ok;
    out["clt_k1_ok"] = summary.clt_k1_ok;
    nlohmann::json atoms = nlohmann::json::array();
    for (std::size_t i = 0; i < measure.support.size(); ++i)
        atoms.push_back({{"theta", measure.support[i]}, {"weight", measure.weights[i]}});
    out["pi_k"] = atoms;
    out["h_norms_sq"] = measure.h_norms_sq;
    nlohmann::json taus = nlohmann::json::array();
    for (double d : deltas) {
        for (int v : vs) {
            auto ts = bss::tau_sq(spec, k, v, d, rel_tol);
            taus.push_back({{"delta_n", d},
                            {"k", k},
                            {"v", v},
                            {"exact", ts.tau_sq_exact},
                            {"asymptotic", ts.tau_sq_asymptotic}});
        }
    }
    out["tau"] = taus;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_simulate(const GlobalFlags& g, const std::string& spec_path, double delta_n,
                 double horizon, int kappa, double t_cut, const std::string& sigma_text, double mu,
                 std::uint64_t seed, const std::string& out_path) {
    auto spec = bss::load_weight_spec(spec_path);
    auto sigma = bss::parse_sigma(sigma_text);
    bss::GridSpec grid{delta_n, horizon, kappa, t_cut};
    auto path = bss::simulate_bss(spec, mu, sigma, grid, g.seed.value_or(seed));
    bss::save_path_csv(path, out_path);
    if (!g.verbose.empty())
        std::cerr << "wrote " << path.values.size() << " samples to " << out_path << "\n";
    return 0;
}

int run_estimate(const GlobalFlags&, const std::string& in_path, int k, double delta_n, double t,
                 std::optional<double> null_alpha, const std::string& spec_path) {
    auto path = bss::load_path_csv(in_path, delta_n);
    bss::EstimateOptions opt;
    opt.null_alpha = null_alpha;
    if (!spec_path.empty()) opt.known_spec = bss::load_weight_spec(spec_path);
    const double t_used = t > 0.0 ? t : path.grid.horizon;
    auto est = bss::estimate_alpha(path, k, t_used, opt);
    nlohmann::json out;
    out["alpha_hat"] = est.alpha_hat;
    out["s_n"] = est.s_n;
    out["qv_1"] = {{"value", est.qv_1.value}, {"n_terms", est.qv_1.n_terms}, {"v", 1}};
    out["qv_2"] = {{"value", est.qv_2.value}, {"n_terms", est.qv_2.n_terms}, {"v", 2}};
    out["qq_1"] = est.qq_1;
    if (est.t_stat) out["t_stat"] = *est.t_stat;
    else out["t_stat"] = nullptr;
    out["ci_95"] = {{"lower", est.ci_95.lower}, {"upper", est.ci_95.upper}};
    out["lambda"] = {{"l11", est.lambda_used.l11},
                     {"l12", est.lambda_used.l12},
                     {"l22", est.lambda_used.l22},
                     {"hurst", est.lambda_used.hurst},
                     {"truncation_j", est.lambda_used.truncation_j},
                     {"tail_bound", est.lambda_used.tail_bound}};
    out["clamped"] = est.clamped;
    out["horizon_unchecked"] = est.horizon_unchecked;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_experiment_cmd(const GlobalFlags& g, const std::string& config_path,
                       const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw bss::ValidationError("cannot open experiment config '" + config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string base_dir = std::filesystem::path(config_path).parent_path().string();
    auto cfg = bss::experiment_config_from_toml(bss::toml::parse(ss.str()),
                                                base_dir.empty() ? "." : base_dir);
    if (g.seed) cfg.master_seed = *g.seed;
    cfg.threads = g.threads;
    auto report = bss::run_experiment(cfg);
    bss::write_report(report, out_dir);
    if (!g.verbose.empty()) std::cerr << "report written to " << out_dir << "/report.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"high-frequency limit theory for Brownian semi-stationary processes"};
    app.require_subcommand(0, 1);
    GlobalFlags g;
    app.add_option("--seed", g.seed, "override the seed / master seed");
    app.add_option("--threads", g.threads, "worker threads (0 = all logical cores)")
        ->check(CLI::Range(0, 1024));
    app.add_option("--verbose", g.verbose,
                   "verbose diagnostics; pass 'json' for machine-readable errors")
        ->expected(0, 1);
    app.set_version_flag("--version", std::string(BSSHF_VERSION) + "+" + BSSHF_BUILD_HASH);

    // limits
    auto* limits = app.add_subcommand("limits", "limit measure, h norms, tau scaling, Lambda");
    std::string limits_spec;
    int limits_k = 2;
    std::vector<double> limits_deltas;
    std::vector<int> limits_vs{1};
    bool limits_lambda = false;
    double limits_rel_tol = 1e-8;
    limits->add_option("--spec", limits_spec, "weight spec TOML file")->required();
    limits->add_option("--k", limits_k, "filter order")->check(CLI::Range(1, 12));
    limits->add_option("--delta-n", limits_deltas, "observation steps for tau entries")
        ->check(CLI::PositiveNumber);
    limits->add_option("--v", limits_vs, "frequency multipliers (1 and/or 2)")
        ->check(CLI::Range(1, 2));
    limits->add_flag("--lambda", limits_lambda, "emit the Lambda matrix instead");
    limits->add_option("--rel-tol", limits_rel_tol, "quadrature tolerance")
        ->check(CLI::Range(1e-12, 1e-4));

    // simulate
    auto* simulate = app.add_subcommand("simulate", "sample a path and write CSV");
    std::string sim_spec, sim_sigma = "constant:1.0", sim_out = "path.csv";
    double sim_delta = 1.0 / 256.0, sim_horizon = 1.0, sim_tcut = 8.0, sim_mu = 0.0;
    int sim_kappa = 8;
    std::uint64_t sim_seed = 1;
    simulate->add_option("--spec", sim_spec, "weight spec TOML file")->required();
    simulate->add_option("--delta-n", sim_delta, "observation step")->check(CLI::PositiveNumber);
    simulate->add_option("--horizon", sim_horizon, "sample horizon")->check(CLI::PositiveNumber);
    simulate->add_option("--kappa", sim_kappa, "inner refinement per step")
        ->check(CLI::Range(1, 4096));
    simulate->add_option("--t-cut", sim_tcut, "kernel memory cutoff")->check(CLI::PositiveNumber);
    simulate->add_option("--sigma", sim_sigma, "intermittency kind:params");
    simulate->add_option("--mu", sim_mu, "constant level");
    simulate->add_option("--seed", sim_seed, "path seed");
    simulate->add_option("--out", sim_out, "output CSV file");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "estimate the smoothness parameter from CSV");
    std::string est_in, est_spec;
    int est_k = 2;
    double est_delta = 0.0, est_t = 0.0;
    std::optional<double> est_null;
    estimate->add_option("--in", est_in, "input path CSV")->required();
    estimate->add_option("--k", est_k, "filter order")->check(CLI::Range(1, 12));
    estimate->add_option("--delta-n", est_delta, "observation step of the CSV")
        ->required()
        ->check(CLI::PositiveNumber);
    estimate->add_option("--t", est_t, "statistic horizon (default: whole path)");
    estimate->add_option("--null-alpha", est_null, "null value for the feasible test statistic");
    estimate->add_option("--spec", est_spec, "weight spec TOML (enables the CLT horizon check)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment from TOML");
    std::string exp_config, exp_out = "report";
    experiment->add_option("--config", exp_config, "experiment TOML config")->required();
    experiment->add_option("--out", exp_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (limits->parsed())
            return run_limits(g, limits_spec, limits_k, limits_deltas, limits_vs, limits_lambda,
                              limits_rel_tol);
        if (simulate->parsed())
            return run_simulate(g, sim_spec, sim_delta, sim_horizon, sim_kappa, sim_tcut, sim_sigma,
                                sim_mu, sim_seed, sim_out);
        if (estimate->parsed())
            return run_estimate(g, est_in, est_k, est_delta, est_t, est_null, est_spec);
        if (experiment->parsed()) return run_experiment_cmd(g, exp_config, exp_out);
        std::cout << app.help() << "\n";
        return 0;
    } catch (const bss::ValidationError& e) {
        report_error(g, "validation", "", e.what());
        return 1;
    } catch (const bss::NumericalError& e) {
        report_error(g, "numerical", e.operation(), e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error(g, "internal", "", e.what());
        return 2;
    }
}
