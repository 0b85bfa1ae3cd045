#pragma once

// Path generation: exact stationary Gaussian sampling via circulant
// embedding (the Gaussian core and fractional Brownian motion), and the
// truncated refined Riemann scheme for the full process with stochastic
// intermittency. Samplers cache everything deterministic (covariance
// tables, embedding eigenvalues, kernel cell weights) so Monte Carlo
// replications only pay for draws and FFTs. All randomness derives from a
// single seed through fixed hash-split streams; paths are bit-reproducible.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bss/common.hpp"
#include "bss/limit_quantities.hpp"
#include "bss/rng.hpp"
#include "bss/weight_model.hpp"

namespace bss {

struct GridSpec {
    double delta_n = 1.0 / 256.0;
    double horizon = 1.0;
    int refinement = 8;      // inner sub-steps per delta_n for the Riemann scheme
    double truncation = 8.0; // kernel memory cutoff, must exceed theta_l + half_width_l
};

enum class PathKind { GaussianCore, Bss, Fbm };

struct PathSample {
    std::vector<double> values;
    GridSpec grid;
    std::uint64_t seed = 0;
    PathKind kind = PathKind::GaussianCore;
    std::optional<std::vector<double>> sigma_values;
};

// --- intermittency -----------------------------------------------------

struct ConstantSigma {
    double value = 1.0;
};

// sigma(t) = a0 + sum_m (cos_coeffs[m-1] cos(m t) + sin_coeffs[m-1] sin(m t))
struct TrigPolySigma {
    double a0 = 1.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
};

// sigma(t) = exp(Y_t), dY = -mean_reversion Y dt + vol dB. Holder continuous
// only up to order 1/2, so not admissible for CLT-grade runs.
struct ExpOuSigma {
    double mean_reversion = 1.0;
    double vol = 0.5;
    double initial_log = 0.0;
};

using IntermittencySpec = std::variant<ConstantSigma, TrigPolySigma, ExpOuSigma>;

inline bool sigma_is_deterministic(const IntermittencySpec& s) {
    return !std::holds_alternative<ExpOuSigma>(s);
}

// Theorem-grade smoothness: Holder order > 1/2 on compacts
inline bool sigma_clt_compliant(const IntermittencySpec& s) { return sigma_is_deterministic(s); }

inline double sigma_value(const IntermittencySpec& s, double t) {
    if (const auto* c = std::get_if<ConstantSigma>(&s)) return c->value;
    if (const auto* tp = std::get_if<TrigPolySigma>(&s)) {
        double acc = tp->a0;
        for (std::size_t m = 0; m < tp->cos_coeffs.size(); ++m)
            acc += tp->cos_coeffs[m] * std::cos(double(m + 1) * t);
        for (std::size_t m = 0; m < tp->sin_coeffs.size(); ++m)
            acc += tp->sin_coeffs[m] * std::sin(double(m + 1) * t);
        return acc;
    }
    throw ValidationError("stochastic intermittency has no pointwise value");
}

// "kind:params" spec strings: constant:c | trig:a0[,a1,b1[,a2,b2...]] |
// expou:mean_reversion,vol,initial_log
inline IntermittencySpec parse_sigma(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::size_t pos = colon + 1;
        while (pos < text.size()) {
            std::size_t comma = text.find(',', pos);
            if (comma == std::string::npos) comma = text.size();
            params.push_back(std::stod(text.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (kind == "constant") {
        if (params.size() != 1) throw ValidationError("constant sigma needs one parameter");
        return ConstantSigma{params[0]};
    }
    if (kind == "trig") {
        if (params.empty()) throw ValidationError("trig sigma needs a0[,a1,b1,...]");
        TrigPolySigma t;
        t.a0 = params[0];
        for (std::size_t i = 1; i < params.size(); i += 2) {
            t.cos_coeffs.push_back(params[i]);
            if (i + 1 < params.size()) t.sin_coeffs.push_back(params[i + 1]);
        }
        return t;
    }
    if (kind == "expou") {
        if (params.size() != 3)
            throw ValidationError("expou sigma needs mean_reversion,vol,initial_log");
        if (!(params[0] > 0.0)) throw ValidationError("expou mean reversion must be positive");
        return ExpOuSigma{params[0], params[1], params[2]};
    }
    throw ValidationError("unknown sigma kind '" + kind + "'");
}

inline std::string sigma_to_string(const IntermittencySpec& s) {
    char buf[80];
    if (const auto* c = std::get_if<ConstantSigma>(&s)) {
        std::snprintf(buf, sizeof buf, "constant:%.17g", c->value);
        return buf;
    }
    if (const auto* t = std::get_if<TrigPolySigma>(&s)) {
        std::string out = "trig:";
        std::snprintf(buf, sizeof buf, "%.17g", t->a0);
        out += buf;
        const std::size_t m = std::max(t->cos_coeffs.size(), t->sin_coeffs.size());
        for (std::size_t i = 0; i < m; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g",
                          i < t->cos_coeffs.size() ? t->cos_coeffs[i] : 0.0,
                          i < t->sin_coeffs.size() ? t->sin_coeffs[i] : 0.0);
            out += buf;
        }
        return out;
    }
    const auto& e = std::get<ExpOuSigma>(s);
    std::snprintf(buf, sizeof buf, "expou:%.17g,%.17g,%.17g", e.mean_reversion, e.vol,
                  e.initial_log);
    return buf;
}

// --- stationary Gaussian sampling ---------------------------------------

namespace detail {

inline std::size_t observation_count(const GridSpec& grid) {
    if (!(grid.delta_n > 0.0) || !(grid.horizon > 0.0))
        throw ValidationError("grid needs positive step and horizon");
    const double steps = grid.horizon / grid.delta_n;
    if (steps > 1e7) throw ValidationError("grid exceeds the 1e7-step resource guard");
    return static_cast<std::size_t>(std::floor(steps + 1e-9));
}

} // namespace detail

// Exact sampler for a zero-mean stationary Gaussian sequence. Prefers the
// circulant embedding (with one padded retry); when eigenvalues fall below
// -1e-8 under both embeddings it factorizes the dense covariance (n <= 2^14).
class StationaryGaussianSampler {
public:
    template <class CovProvider>
    StationaryGaussianSampler(const CovProvider& cov_at_length, std::size_t n, const char* label)
        : n_(n) {
        if (n_ < 1) throw ValidationError("sampler needs at least one point");
        for (std::size_t L : {n_, 2 * n_}) {
            auto cov = cov_at_length(std::max<std::size_t>(L, 2));
            if (try_embedding(cov)) return;
        }
        build_dense(cov_at_length(std::max<std::size_t>(n_, 2)), label);
    }

    std::size_t size() const { return n_; }
    bool used_dense() const { return dense_; }

    // thread-safe for concurrent calls with distinct engines
    std::vector<double> sample(std::mt19937_64& rng) const {
        std::normal_distribution<double> gauss(0.0, 1.0);
        if (dense_) {
            Eigen::VectorXd z(static_cast<long>(n_));
            for (std::size_t i = 0; i < n_; ++i) z(long(i)) = gauss(rng);
            Eigen::VectorXd x = chol_ * z;
            return std::vector<double>(x.data(), x.data() + n_);
        }
        const std::size_t M = eig_.size();
        std::vector<std::complex<double>> v(M);
        const double m_d = double(M);
        {
            const double z0 = gauss(rng);
            const double zh = gauss(rng);
            v[0] = std::sqrt(eig_[0] * m_d) * z0;
            v[M / 2] = std::sqrt(eig_[M / 2] * m_d) * zh;
        }
        for (std::size_t m = 1; m < M / 2; ++m) {
            const double a = gauss(rng);
            const double b = gauss(rng);
            const double s = std::sqrt(eig_[m] * m_d / 2.0);
            v[m] = std::complex<double>(s * a, s * b);
            v[M - m] = std::conj(v[m]);
        }
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> x(M);
        fft.inv(x, v);
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = x[i].real();
        return out;
    }

private:
    bool try_embedding(const std::vector<double>& cov) {
        const std::size_t L = cov.size();
        if (L < 2 || n_ > L) return false;
        const std::size_t M = 2 * (L - 1);
        std::vector<std::complex<double>> c(M);
        for (std::size_t i = 0; i < L; ++i) c[i] = cov[i];
        for (std::size_t i = L; i < M; ++i) c[i] = cov[M - i];
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> eig(M);
        fft.fwd(eig, c);
        double min_eig = 0.0;
        for (auto& e : eig) min_eig = std::min(min_eig, e.real());
        if (min_eig < -1e-8) return false;
        eig_.resize(M);
        for (std::size_t i = 0; i < M; ++i) eig_[i] = std::max(0.0, eig[i].real());
        dense_ = false;
        return true;
    }

    void build_dense(const std::vector<double>& cov, const char* label) {
        if (n_ > (1u << 14))
            throw NumericalError(label, "covariance not embeddable and too large for dense fallback");
        Eigen::MatrixXd K(static_cast<long>(n_), static_cast<long>(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                K(long(i), long(j)) = cov[std::size_t(std::llabs(long(i) - long(j)))];
        double jitter = 0.0;
        for (int attempt = 0; attempt < 3; ++attempt) {
            Eigen::MatrixXd Kj = K;
            if (jitter > 0.0) Kj.diagonal().array() += jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(Kj);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                dense_ = true;
                return;
            }
            jitter = (jitter == 0.0) ? 1e-12 * cov[0] : jitter * 100.0;
        }
        throw NumericalError(label, "covariance is not numerically positive semidefinite");
    }

    std::size_t n_;
    bool dense_ = false;
    std::vector<double> eig_;
    Eigen::MatrixXd chol_;
};

// fGn covariance at integer lag m for step h
inline double fgn_cov(double hurst, double step, long m) {
    const double h2 = 2.0 * hurst;
    const double am = std::fabs(double(m));
    return 0.5 * std::pow(step, h2) *
           (std::pow(am + 1.0, h2) - 2.0 * std::pow(am, h2) + std::pow(std::fabs(am - 1.0), h2));
}

// Exact fBm increments; the path is the anchored cumulative sum.
class FbmSampler {
public:
    FbmSampler(double hurst, std::size_t n_increments, double step)
        : hurst_(hurst), n_(n_increments), step_(step),
          core_(
              [hurst, step](std::size_t L) {
                  std::vector<double> cov(L);
                  for (std::size_t m = 0; m < L; ++m) cov[m] = fgn_cov(hurst, step, long(m));
                  return cov;
              },
              checked(n_increments, hurst, step), "simulate_fbm") {}

    PathSample sample(std::uint64_t seed) const {
        auto rng = make_engine(derive_seed(seed, 1));
        auto incr = core_.sample(rng);
        PathSample out;
        out.kind = PathKind::Fbm;
        out.seed = seed;
        out.grid = GridSpec{step_, double(n_) * step_, 1, 0.0};
        out.values.resize(n_ + 1);
        out.values[0] = 0.0;
        for (std::size_t i = 0; i < n_; ++i) out.values[i + 1] = out.values[i] + incr[i];
        return out;
    }

private:
    static std::size_t checked(std::size_t n, double hurst, double step) {
        if (!(hurst > 0.0) || !(hurst < 1.0))
            throw ValidationError("Hurst parameter must lie in (0,1)");
        if (n == 0 || !(step > 0.0))
            throw ValidationError("fBm needs at least one increment and a positive step");
        if (n > std::size_t(1e7)) throw ValidationError("grid exceeds the 1e7-step resource guard");
        return n;
    }

    double hurst_;
    std::size_t n_;
    double step_;
    StationaryGaussianSampler core_;
};

inline PathSample simulate_fbm(double hurst, std::size_t n_increments, double step,
                               std::uint64_t seed) {
    return FbmSampler(hurst, n_increments, step).sample(seed);
}

// Exact sampler for the Gaussian core on the observation grid; the
// covariance table is computed once by singularity-aware quadrature.
class GaussianCoreSampler {
public:
    GaussianCoreSampler(const WeightSpec& spec, const GridSpec& grid, double rel_tol = 1e-8)
        : grid_(grid),
          core_(
              [&spec, &grid, rel_tol](std::size_t L) {
                  std::vector<double> t_grid(L);
                  for (std::size_t m = 0; m < L; ++m) t_grid[m] = double(m) * grid.delta_n;
                  auto ck = covariance_kernel(spec, t_grid, rel_tol);
                  std::vector<double> cov(L);
                  for (std::size_t m = 0; m < L; ++m) cov[m] = ck.g_norm_sq * ck.r(t_grid[m]);
                  return cov;
              },
              detail::observation_count(grid) + 1, "simulate_gaussian_core") {}

    PathSample sample(std::uint64_t seed) const {
        auto rng = make_engine(derive_seed(seed, 1));
        PathSample out;
        out.kind = PathKind::GaussianCore;
        out.seed = seed;
        out.grid = grid_;
        out.values = core_.sample(rng);
        return out;
    }

private:
    GridSpec grid_;
    StationaryGaussianSampler core_;
};

inline PathSample simulate_gaussian_core(const WeightSpec& spec, const GridSpec& grid,
                                         std::uint64_t seed) {
    return GaussianCoreSampler(spec, grid).sample(seed);
}

enum class SimulationMethod { Auto, ExactGaussian, Riemann };

// Full process X_t = mu + int g(t-s) sigma_s W(ds). Constant sigma routes
// through the exact Gaussian core; anything else uses the truncated refined
// Riemann scheme on an inner grid of step delta_n / refinement, with
// cell-averaged kernel weights in cells containing a singularity. Driving
// increments are drawn backwards from the horizon so enlarging the memory
// cutoff extends, rather than reshuffles, the shared noise.
class BssSampler {
public:
    BssSampler(const WeightSpec& spec, double mu, IntermittencySpec sigma, const GridSpec& grid,
               SimulationMethod method = SimulationMethod::Auto)
        : spec_(spec), mu_(mu), sigma_(std::move(sigma)), grid_(grid) {
        throw_if_invalid(spec_);
        n_obs_ = detail::observation_count(grid_);
        if (spec_.kind == WeightKind::SingularKernel) {
            const auto& last = spec_.segments.back();
            if (!(grid_.truncation > last.theta + last.half_width))
                throw ValidationError("truncation must exceed the last singularity window");
        }
        const auto* constant = std::get_if<ConstantSigma>(&sigma_);
        exact_ = constant && method != SimulationMethod::Riemann;
        if (method == SimulationMethod::ExactGaussian && !constant)
            throw ValidationError("exact simulation requires constant sigma");
        if (exact_) {
            core_ = std::make_unique<GaussianCoreSampler>(spec_, grid_);
            return;
        }
        if (grid_.refinement < 1) throw ValidationError("refinement must be >= 1");
        h_ = grid_.delta_n / double(grid_.refinement);
        q_cells_ = static_cast<std::size_t>(std::ceil(grid_.truncation / h_ - 1e-9));
        n_cells_ = q_cells_ + n_obs_ * static_cast<std::size_t>(grid_.refinement);
        if (n_cells_ > (1u << 26)) throw ValidationError("inner grid exceeds the resource guard");
        build_weights();
        fft_size_ = 1;
        while (fft_size_ < n_cells_ + q_cells_ + 1) fft_size_ <<= 1;
        std::vector<std::complex<double>> wf(fft_size_);
        for (std::size_t q = 1; q <= q_cells_; ++q) wf[q] = weights_[q];
        weight_spectrum_.resize(fft_size_);
        Eigen::FFT<double> fft;
        fft.fwd(weight_spectrum_, wf);
    }

    PathSample sample(std::uint64_t seed) const {
        if (exact_) {
            auto core = core_->sample(seed);
            const double c = std::get<ConstantSigma>(sigma_).value;
            PathSample out;
            out.kind = PathKind::Bss;
            out.seed = seed;
            out.grid = grid_;
            out.values.resize(core.values.size());
            for (std::size_t i = 0; i < core.values.size(); ++i)
                out.values[i] = mu_ + c * core.values[i];
            out.sigma_values = std::vector<double>(core.values.size(), c);
            return out;
        }
        return sample_riemann(seed);
    }

private:
    void build_weights() {
        weights_.assign(q_cells_ + 1, 0.0);
        std::vector<double> special;
        if (spec_.kind == WeightKind::SingularKernel) {
            for (const auto& s : spec_.segments) special.push_back(s.theta);
        } else {
            for (const auto& t : spec_.indicator_terms) {
                special.push_back(t.lower);
                special.push_back(t.upper);
            }
        }
        quad::Options opt;
        opt.rel_tol = 1e-10;
        opt.label = "simulate_bss.cell_average";
        for (std::size_t q = 1; q <= q_cells_; ++q) {
            const double lo = double(q - 1) * h_;
            const double hi = double(q) * h_;
            bool needs_average = false;
            for (double sp : special) needs_average |= (sp >= lo - 1e-12 && sp <= hi + 1e-12);
            if (!needs_average) {
                weights_[q] = eval_g(spec_, 0.5 * (lo + hi));
                continue;
            }
            std::vector<quad::Breakpoint> bps;
            if (spec_.kind == WeightKind::SingularKernel) {
                for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
                    const double th = spec_.segments[i].theta;
                    if (th >= lo - 1e-12 && th <= hi + 1e-12) {
                        const WeightSpec& sp = spec_;
                        bps.push_back({th, spec_.segments[i].alpha,
                                       [&sp, i](double s) { return eval_g_near(sp, i, s); }});
                    }
                }
            } else {
                for (double sp : special)
                    if (sp >= lo - 1e-12 && sp <= hi + 1e-12) bps.push_back({sp, 0.0});
            }
            const WeightSpec& sp = spec_;
            weights_[q] =
                quad::integrate([&sp](double u) { return eval_g(sp, u); }, lo, hi, bps, opt).value /
                h_;
        }
    }

    PathSample sample_riemann(std::uint64_t seed) const {
        // intermittency on the inner grid (one extra point at the horizon)
        std::vector<double> sig(n_cells_ + 1);
        if (const auto* ou = std::get_if<ExpOuSigma>(&sigma_)) {
            auto rng_sigma = make_engine(derive_seed(seed, 2));
            std::normal_distribution<double> gauss(0.0, 1.0);
            const double decay = std::exp(-ou->mean_reversion * h_);
            const double innov =
                ou->vol * std::sqrt((1.0 - decay * decay) / (2.0 * ou->mean_reversion));
            double y = ou->initial_log;
            sig[0] = std::exp(y);
            for (std::size_t m = 1; m <= n_cells_; ++m) {
                y = y * decay + innov * gauss(rng_sigma);
                sig[m] = std::exp(y);
            }
        } else {
            for (std::size_t m = 0; m <= n_cells_; ++m)
                sig[m] = sigma_value(sigma_, (double(m) - double(q_cells_)) * h_);
        }

        // driving noise, drawn from the horizon backwards
        std::vector<double> y(n_cells_);
        {
            auto rng_w = make_engine(derive_seed(seed, 1));
            std::normal_distribution<double> gauss(0.0, std::sqrt(h_));
            for (std::size_t m = n_cells_; m-- > 0;) y[m] = sig[m] * gauss(rng_w);
        }

        // X_i = mu + sum_{q=1}^{Q} w_q y_{Q + i kappa - q} via FFT convolution
        std::vector<std::complex<double>> yf(fft_size_), conv(fft_size_);
        for (std::size_t m = 0; m < n_cells_; ++m) yf[m] = y[m];
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> Yf(fft_size_);
        fft.fwd(Yf, yf);
        for (std::size_t i = 0; i < fft_size_; ++i) Yf[i] *= weight_spectrum_[i];
        fft.inv(conv, Yf);

        PathSample out;
        out.kind = PathKind::Bss;
        out.seed = seed;
        out.grid = grid_;
        const std::size_t n_pts = n_obs_ + 1;
        out.values.resize(n_pts);
        out.sigma_values = std::vector<double>(n_pts);
        const std::size_t kap = static_cast<std::size_t>(grid_.refinement);
        for (std::size_t i = 0; i < n_pts; ++i) {
            out.values[i] = mu_ + conv[q_cells_ + i * kap].real();
        (*out.sigma_values)[i] = sig[q_cells_ + i * kap];
        }
        return out;
    }

    WeightSpec spec_;
    double mu_;
    IntermittencySpec sigma_;
    GridSpec grid_;
    std::size_t n_obs_ = 0;
    bool exact_ = false;
    std::unique_ptr<GaussianCoreSampler> core_;
    double h_ = 0.0;
    std::size_t q_cells_ = 0;
    std::size_t n_cells_ = 0;
    std::size_t fft_size_ = 1;
    std::vector<double> weights_;
    std::vector<std::complex<double>> weight_spectrum_;
};

inline PathSample simulate_bss(const WeightSpec& spec, double mu, const IntermittencySpec& sigma,
                               const GridSpec& grid, std::uint64_t seed,
                               SimulationMethod method = SimulationMethod::Auto) {
    return BssSampler(spec, mu, sigma, grid, method).sample(seed);
}

} // namespace bss
