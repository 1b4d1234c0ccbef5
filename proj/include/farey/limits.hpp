#pragma once

// Limit-theorem verification harness for the skew product: exact mixing
// errors over lifted mediant levels, Green-Kubo variance, central and local
// limit tests, and the characteristic-function probe.  All distributional
// simulation uses the backward inverse-branch random walk started from an
// invariant-measure draw, which has exactly the law of a stationary forward
// orbit read in reverse and is numerically stable (forward float iteration
// of a map with a neutral fixed point is not distribution-faithful).

#include <farey/dynamics.hpp>
#include <farey/minkowski.hpp>
#include <farey/quadrature.hpp>
#include <farey/rational.hpp>
#include <farey/renewal.hpp>
#include <farey/rng.hpp>
#include <farey/transfer.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace farey::limits {

struct Observable {
    std::string name;
    SkewObservable eval;
    std::string smoothness_tag;
};

/// Rejects observables that are not finite at 10^4 invariant-measure points.
inline void validate_observable(const Observable& obs, std::uint64_t seed = 7,
                                double r_modulus = 2.0) {
    SplitMix64 rng = SplitMix64::stream(seed, 0);
    double m = std::log(r_modulus);
    for (int i = 0; i < 10000; ++i) {
        double x = question_mark_inverse_fast(rng.next_double());
        double v = obs.eval(SkewPoint{x, m * rng.next_double(), m});
        if (!std::isfinite(v))
            throw std::domain_error("observable '" + obs.name + "' not finite at sample point");
    }
}

struct RunConfig {
    std::uint64_t seed = 20260826;
    long trials = 100000;
    int n_steps = 1000;
    double r_modulus = 2.0;
    int worker_count = 1;
};

inline SkewPoint sample_invariant(SplitMix64& rng, double r_modulus = 2.0) {
    double x = question_mark_inverse_fast(rng.next_double());
    double m = std::log(r_modulus);
    return SkewPoint{x, m * rng.next_double(), m};
}

inline SkewPoint sample_invariant(std::uint64_t seed, double r_modulus = 2.0) {
    SplitMix64 rng = SplitMix64::stream(seed, 0);
    return sample_invariant(rng, r_modulus);
}

/// Fixed-tree pairwise summation (binary counter): the result depends only on
/// the sequence of added values, never on worker scheduling.
class PairwiseSum {
public:
    void add(double x) {
        std::uint64_t c = ++count_;
        std::size_t lvl = 0;
        while ((c & 1) == 0) {
            x += slots_[lvl];
            slots_[lvl] = 0.0;
            ++lvl;
            c >>= 1;
        }
        if (lvl >= slots_.size()) slots_.resize(lvl + 1, 0.0);
        slots_[lvl] = x;
    }
    double total() const {
        double s = 0.0;
        for (double v : slots_) s += v;
        return s;
    }
    std::uint64_t count() const { return count_; }

private:
    std::vector<double> slots_;
    std::uint64_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Exact mixing errors over lifted mediant levels.

struct MixingReport {
    std::vector<std::pair<int, double>> errors;  // (n, |level mean - integral|)
    double integral = 0.0;                       // tensor-quadrature limit
    double theta_hat = 0.0;
    double amplitude = 0.0;  // fitted prefactor of the geometric envelope
    double r_squared = 0.0;
    bool fit_exact = false;  // all errors at rounding level
};

/// Mean of f over the lifted level-n points minus the invariant integral,
/// for n = 1..n_max, with a geometric fit over [fit_from, n_max].
inline MixingReport exact_mixing_error(const Observable& f, int n_max, int fit_from = 6,
                                       double r_modulus = 2.0, double quad_tol = 1e-9) {
    if (n_max < 2 || n_max > 22)
        throw std::invalid_argument("exact_mixing_error: need 2 <= n_max <= 22");
    if (fit_from < 1 || fit_from >= n_max)
        throw std::invalid_argument("exact_mixing_error: bad fit window");
    double m = std::log(r_modulus);
    MixingReport rep;
    rep.integral = integrate_mu_fiber(
        [&](double x, double w) { return f.eval(SkewPoint{x, w, m}); }, m, quad_tol);
    std::vector<double> e(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        LiftedFareySet lev = lift_level(n, r_modulus);
        PairwiseSum acc;
        for (const auto& [x, w] : lev.points)
            acc.add(f.eval(SkewPoint{x.to_double(), w, m}));
        e[n] = std::abs(acc.total() / double(lev.points.size()) - rep.integral);
        rep.errors.emplace_back(n, e[n]);
    }
    renewal::GeometricFit fit = renewal::fit_geometric(e, fit_from, n_max);
    rep.theta_hat = fit.rate;
    rep.amplitude = fit.amplitude;
    rep.r_squared = fit.r_squared;
    rep.fit_exact = fit.exact;
    return rep;
}

// ---------------------------------------------------------------------------
// Green-Kubo variance.

struct SigmaReport {
    double sigma2 = 0.0;
    double stderr_ = 0.0;          // Monte Carlo error plus extrapolated tail
    double tail_bound = 0.0;       // bound on the truncated autocovariance tail
    std::vector<double> autocov;   // c_0..c_lag_max
    bool flagged_negative = false; // estimate below -3 stderr
};

/// sigma^2 = c_0 + 2 sum_{k>=1} c_k with c_k the lag-k autocovariance of psi
/// along stationary orbits, estimated over cfg.trials backward walks with
/// all time origins in a window of length `origin_window` per trajectory.
inline SigmaReport sigma_squared(const Observable& psi, int lag_max, const RunConfig& cfg,
                                 int origin_window = 0) {
    if (lag_max < 1 || lag_max > 200)
        throw std::invalid_argument("sigma_squared: need 1 <= lag_max <= 200");
    if (cfg.trials < 1) throw std::invalid_argument("sigma_squared: trials < 1");
    const int B = origin_window > 0 ? origin_window : 4 * lag_max;
    const int L = lag_max + B;  // steps per trajectory
    std::vector<PairwiseSum> prod(lag_max + 1), lagged(lag_max + 1);
    PairwiseSum base_sum, per_trial, per_trial_sq;
    std::vector<double> vals(L + 1);
    for (long i = 0; i < cfg.trials; ++i) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, std::uint64_t(i));
        SkewPoint z = sample_invariant(rng, cfg.r_modulus);
        vals[0] = psi.eval(z);
        for (int k = 1; k <= L; ++k) {
            z = skew_backstep(z, rng.next_bit());
            vals[k] = psi.eval(z);
        }
        double v = 0.0;
        std::vector<double> tprod(lag_max + 1, 0.0), tlag(lag_max + 1, 0.0);
        double tbase = 0.0;
        for (int t = 0; t < B; ++t) {
            tbase += vals[t];
            tprod[0] += vals[t] * vals[t];
            tlag[0] += vals[t];
            v += vals[t] * vals[t];
            for (int k = 1; k <= lag_max; ++k) {
                tprod[k] += vals[t] * vals[t + k];
                tlag[k] += vals[t + k];
                v += 2.0 * vals[t] * vals[t + k];
            }
        }
        base_sum.add(tbase / B);
        for (int k = 0; k <= lag_max; ++k) {
            prod[k].add(tprod[k] / B);
            lagged[k].add(tlag[k] / B);
        }
        v /= B;
        per_trial.add(v);
        per_trial_sq.add(v * v);
    }
    const double N = double(cfg.trials);
    double m0 = base_sum.total() / N;
    SigmaReport rep;
    rep.autocov.resize(lag_max + 1);
    for (int k = 0; k <= lag_max; ++k)
        rep.autocov[k] = prod[k].total() / N - m0 * (lagged[k].total() / N);
    rep.sigma2 = rep.autocov[0];
    for (int k = 1; k <= lag_max; ++k) rep.sigma2 += 2.0 * rep.autocov[k];
    double vm = per_trial.total() / N;
    double vvar = std::max(per_trial_sq.total() / N - vm * vm, 0.0);
    rep.stderr_ = std::sqrt(vvar / N);
    // geometric extrapolation of the truncated tail
    std::vector<double> mag(lag_max + 1, 0.0);
    for (int k = 0; k <= lag_max; ++k) mag[k] = std::abs(rep.autocov[k]);
    renewal::GeometricFit fit = renewal::fit_geometric(mag, lag_max / 2, lag_max);
    if (!fit.exact && fit.rate > 0.0 && fit.rate < 1.0)
        rep.tail_bound = 2.0 * fit.amplitude * std::pow(fit.rate, lag_max + 1) / (1.0 - fit.rate);
    rep.stderr_ += rep.tail_bound;
    rep.flagged_negative = rep.sigma2 < -3.0 * rep.stderr_;
    return rep;
}

// ---------------------------------------------------------------------------
// Central limit theorem.

inline double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

/// Kolmogorov-Smirnov distance between the samples and N(0, sigma^2).
inline double ks_distance(std::vector<double> samples, double sigma) {
    if (samples.empty() || !(sigma > 0.0))
        throw std::invalid_argument("ks_distance: empty samples or sigma <= 0");
    std::sort(samples.begin(), samples.end());
    const double N = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double F = normal_cdf(samples[i], sigma);
        d = std::max({d, std::abs((i + 1) / N - F), std::abs(F - i / N)});
    }
    return d;
}

struct CltReport {
    double ks = 0.0;
    double var_ratio = 0.0;  // Var(S_n)/n
    bool degenerate = false; // coboundary branch: Var(S_n)/n below threshold
    std::vector<double> normalized;  // S_n/sqrt(n), in trial order
};

/// Distribution of S_n psi / sqrt(n) over stationary starts vs N(0, sigma^2).
inline CltReport clt_test(const Observable& psi, int n, const RunConfig& cfg,
                          double sigma2_hat, double degenerate_threshold = 0.01) {
    if (n < 1) throw std::invalid_argument("clt_test: n < 1");
    CltReport rep;
    rep.normalized.reserve(std::size_t(cfg.trials));
    PairwiseSum s1, s2;
    const double rn = std::sqrt(double(n));
    for (long i = 0; i < cfg.trials; ++i) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, std::uint64_t(i));
        SkewPoint z = sample_invariant(rng, cfg.r_modulus);
        double S = 0.0;
        for (int k = 0; k < n; ++k) {
            z = skew_backstep(z, rng.next_bit());
            S += psi.eval(z);
        }
        double u = S / rn;
        rep.normalized.push_back(u);
        s1.add(u);
        s2.add(u * u);
    }
    const double N = double(cfg.trials);
    double mean = s1.total() / N;
    rep.var_ratio = std::max(s2.total() / N - mean * mean, 0.0);
    rep.degenerate = rep.var_ratio < degenerate_threshold;
    if (!rep.degenerate) {
        if (!(sigma2_hat > 0.0))
            throw std::invalid_argument("clt_test: nondegenerate data with sigma2 <= 0");
        rep.ks = ks_distance(rep.normalized, std::sqrt(sigma2_hat));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Local limit theorem.

struct AperiodicityProbe {
    std::vector<std::pair<double, double>> radii;  // (t, spectral radius)
    bool passed = false;                           // all radii strictly < 1
};

/// Spectral radius of the frequency-coupled perturbed operator on a probe
/// grid of t != 0; radii < 1 is the implemented aperiodicity proxy.
inline AperiodicityProbe aperiodicity_probe(const Observable& psi,
                                            const std::vector<double>& t_grid,
                                            int grid_size = 16, int rmax = 12,
                                            int k_freq = 4) {
    TransferContext ctx(grid_size, rmax);
    AperiodicityProbe probe;
    probe.passed = true;
    for (double t : t_grid) {
        if (t == 0.0) throw std::invalid_argument("aperiodicity_probe: t must be nonzero");
        DiscretizedOperator op = perturbed_operator(ctx, psi.eval, t, k_freq);
        double rho = spectral_radius(op);
        probe.radii.emplace_back(t, rho);
        if (!(rho < 1.0)) probe.passed = false;
    }
    return probe;
}

struct LltReport {
    long count = 0;
    double estimate = 0.0;    // sqrt(n) * empirical probability
    double ci_low = 0.0;      // 95% binomial interval on the estimate
    double ci_high = 0.0;
    double prediction = 0.0;  // Leb(I) e^{-kappa^2/(2 sigma^2)} / (sigma sqrt(2 pi))
    bool probe_passed = true;
    std::string warning;
};

/// sqrt(n) P(S_n psi in [lo, hi] + kappa sqrt(n)) against the local Gaussian
/// density prediction.
inline LltReport llt_test(const Observable& psi, double lo, double hi, double kappa,
                          int n, const RunConfig& cfg, double sigma2_hat,
                          const AperiodicityProbe* probe = nullptr) {
    if (n < 1) throw std::invalid_argument("llt_test: n < 1");
    if (!(sigma2_hat > 0.0)) throw std::invalid_argument("llt_test: sigma2 <= 0");
    LltReport rep;
    if (probe) {
        rep.probe_passed = probe->passed;
        if (!probe->passed) rep.warning = "possibly periodic: operator probe radius >= 1";
    }
    if (!(hi > lo)) return rep;  // empty interval: exact zero
    const double rn = std::sqrt(double(n));
    const double shift = kappa * rn;
    for (long i = 0; i < cfg.trials; ++i) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, std::uint64_t(i));
        SkewPoint z = sample_invariant(rng, cfg.r_modulus);
        double S = 0.0;
        for (int k = 0; k < n; ++k) {
            z = skew_backstep(z, rng.next_bit());
            S += psi.eval(z);
        }
        if (S >= lo + shift && S <= hi + shift) ++rep.count;
    }
    const double N = double(cfg.trials);
    double p = rep.count / N;
    double half = 1.959964 * std::sqrt(std::max(p * (1.0 - p), 1.0 / N) / N);
    rep.estimate = rn * p;
    rep.ci_low = rn * std::max(p - half, 0.0);
    rep.ci_high = rn * (p + half);
    double sigma = std::sqrt(sigma2_hat);
    rep.prediction = (hi - lo) * std::exp(-kappa * kappa / (2.0 * sigma2_hat)) /
                     (sigma * std::sqrt(2.0 * std::numbers::pi));
    return rep;
}

// ---------------------------------------------------------------------------
// Characteristic-function probe.

struct CharFnReport {
    Complex probe{0.0, 0.0};       // E[e^{it S_n psi} f(end) g(start)]
    double stderr_ = 0.0;          // componentwise Monte Carlo error, combined
    Complex comparison{0.0, 0.0};  // (1 - sigma^2 t^2 / 2)^n (integral f)(integral g)
    double deviation = 0.0;        // |probe - comparison|
};

inline CharFnReport char_function_probe(const Observable& psi, double t, int n,
                                        const Observable& f, const Observable& g,
                                        const RunConfig& cfg, double sigma2_hat,
                                        double quad_tol = 1e-8) {
    if (n < 1) throw std::invalid_argument("char_function_probe: n < 1");
    if (double(n) * t * t > 50.0)
        throw std::domain_error("char_function_probe: n t^2 > 50 (pure-noise regime)");
    PairwiseSum sre, sim, sre2, sim2;
    for (long i = 0; i < cfg.trials; ++i) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, std::uint64_t(i));
        SkewPoint z = sample_invariant(rng, cfg.r_modulus);
        double f_end = f.eval(z);  // z is the forward-orbit endpoint
        double S = 0.0;
        for (int k = 0; k < n; ++k) {
            z = skew_backstep(z, rng.next_bit());
            S += psi.eval(z);
        }
        double g_start = g.eval(z);
        Complex v = std::exp(Complex(0.0, t * S)) * (f_end * g_start);
        sre.add(v.real());
        sim.add(v.imag());
        sre2.add(v.real() * v.real());
        sim2.add(v.imag() * v.imag());
    }
    const double N = double(cfg.trials);
    CharFnReport rep;
    rep.probe = Complex(sre.total() / N, sim.total() / N);
    double vr = std::max(sre2.total() / N - rep.probe.real() * rep.probe.real(), 0.0);
    double vi = std::max(sim2.total() / N - rep.probe.imag() * rep.probe.imag(), 0.0);
    rep.stderr_ = std::sqrt((vr + vi) / N);
    double m = std::log(cfg.r_modulus);
    double intf = integrate_mu_fiber(
        [&](double x, double w) { return f.eval(SkewPoint{x, w, m}); }, m, quad_tol);
    double intg = integrate_mu_fiber(
        [&](double x, double w) { return g.eval(SkewPoint{x, w, m}); }, m, quad_tol);
    rep.comparison = std::pow(1.0 - sigma2_hat * t * t / 2.0, n) * intf * intg;
    rep.deviation = std::abs(rep.probe - rep.comparison);
    return rep;
}

/// The fiber cosine observable used throughout: cos(2 pi omega / log r),
/// which has invariant-measure mean zero by fiber symmetry.
inline Observable fiber_cosine(double r_modulus = 2.0) {
    double theta = 2.0 * std::numbers::pi / std::log(r_modulus);
    return Observable{"fiber-cosine",
                      [theta](const SkewPoint& p) { return std::cos(theta * p.omega); },
                      "analytic in omega, constant in x"};
}

/// A coboundary observable u - u o (skew map) for a smooth potential u, so
/// every Birkhoff sum telescopes and the asymptotic variance vanishes.
inline Observable coboundary_observable(double r_modulus = 2.0) {
    double theta = 2.0 * std::numbers::pi / std::log(r_modulus);
    auto u = [theta](const SkewPoint& p) {
        return 0.4 * std::cos(theta * p.omega) * (1.0 + 0.5 * p.x);
    };
    return Observable{"coboundary",
                      [u](const SkewPoint& p) { return u(p) - u(skew_step(p)); },
                      "smooth coboundary; Birkhoff sums telescope"};
}

/// Resolve an observable by name; the names accepted on the command line.
inline Observable observable_by_name(const std::string& name, double r_modulus = 2.0) {
    if (name == "fiber-cosine") return fiber_cosine(r_modulus);
    if (name == "coboundary") return coboundary_observable(r_modulus);
    throw std::invalid_argument("unknown observable '" + name +
                                "' (expected fiber-cosine or coboundary)");
}

}  // namespace farey::limits
