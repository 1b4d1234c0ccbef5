#pragma once

// Abstract (perturbed) renewal sequences of operators on finite-dimensional
// spaces: partial sums T_n = sum R_{j_1}...R_{j_p} over compositions, the
// spectral projection P and Kac coefficient mu at the eigenvalue 1 of R(1),
// the perturbed eigenvalue root gamma(t), and limit-law fit reports.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace farey::renewal {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline double operator_norm(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Blocks R_1..R_J (same dimension) with fitted exponential decay
/// ||R_j|| <= C e^{-delta j}.
struct RenewalSequence {
    std::vector<Matrix> blocks;  // blocks[j-1] = R_j
    double decay_rate = 0.0;     // fitted delta
    double decay_amp = 0.0;      // fitted C
    double truncation_bound = 0.0;  // extrapolated || sum_{j>J} R_j ||

    int dim() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
    int max_index() const { return static_cast<int>(blocks.size()); }
};

inline RenewalSequence make_renewal_sequence(std::vector<Matrix> blocks) {
    if (blocks.empty()) throw std::invalid_argument("renewal sequence: no blocks");
    for (const auto& b : blocks)
        if (b.rows() != b.cols() || b.rows() != blocks.front().rows())
            throw std::invalid_argument("renewal sequence: blocks must be square, same dimension");
    RenewalSequence seq;
    seq.blocks = std::move(blocks);
    // fit log||R_j|| = log C - delta j over nonzero blocks
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int j = 1; j <= seq.max_index(); ++j) {
        double nrm = operator_norm(seq.blocks[j - 1]);
        if (nrm < 1e-300) continue;
        double x = j, y = std::log(nrm);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        seq.decay_rate = -slope;
        seq.decay_amp = std::exp((sy - slope * sx) / cnt);
    } else {
        seq.decay_rate = std::log(2.0);  // single-block family: no tail
        seq.decay_amp = cnt == 1 ? operator_norm(seq.blocks.front()) : 0.0;
    }
    if (seq.decay_rate > 0)
        seq.truncation_bound = seq.decay_amp * std::exp(-seq.decay_rate * (seq.max_index() + 1)) /
                               (1.0 - std::exp(-seq.decay_rate));
    return seq;
}

/// T_0 = I, T_n = sum_{j<=min(n,J)} R_j T_{n-j}; equals the composition sum.
inline std::vector<Matrix> partial_sums(const RenewalSequence& seq, int n_max) {
    if (n_max < 1) throw std::invalid_argument("partial_sums: n_max < 1");
    const int d = seq.dim();
    std::vector<Matrix> T(n_max + 1);
    T[0] = Matrix::Identity(d, d);
    for (int n = 1; n <= n_max; ++n) {
        T[n] = Matrix::Zero(d, d);
        for (int j = 1; j <= std::min(n, seq.max_index()); ++j)
            T[n] += seq.blocks[j - 1] * T[n - j];
    }
    return T;
}

struct RenewalLimitData {
    Matrix P;        // rank-one spectral projection at the eigenvalue 1 of R(1)
    double mu = 0.0; // Kac coefficient: P R'(1) P = mu P
};

inline constexpr double keigenvalue_tol = 1e-6;
inline constexpr double kgap_threshold = 1e-3;

/// P from left/right eigenvectors of R(1) at the simple eigenvalue near 1;
/// mu = (l . R'(1) r) / (l . r) with R'(1) = sum j R_j.
inline RenewalLimitData limit_data(const RenewalSequence& seq,
                                   double eig_tol = keigenvalue_tol,
                                   double gap = kgap_threshold) {
    const int d = seq.dim();
    Matrix R1 = Matrix::Zero(d, d), Rp = Matrix::Zero(d, d);
    for (int j = 1; j <= seq.max_index(); ++j) {
        R1 += seq.blocks[j - 1];
        Rp += double(j) * seq.blocks[j - 1];
    }
    Eigen::ComplexEigenSolver<Matrix> right(R1, true), left(R1.adjoint().eval(), true);
    if (right.info() != Eigen::Success || left.info() != Eigen::Success)
        throw std::runtime_error("limit_data: eigensolver failure");
    int ir = -1;
    for (int i = 0; i < d; ++i) {
        if (std::abs(right.eigenvalues()[i] - 1.0) <= eig_tol) {
            if (ir >= 0) throw std::runtime_error("limit_data: eigenvalue near 1 is not simple");
            ir = i;
        }
    }
    if (ir < 0) throw std::runtime_error("limit_data: no eigenvalue within tolerance of 1");
    for (int i = 0; i < d; ++i)
        if (i != ir && std::abs(right.eigenvalues()[i] - 1.0) < gap)
            throw std::runtime_error("limit_data: spectral gap below threshold");
    int il = -1;
    for (int i = 0; i < d; ++i)
        if (std::abs(left.eigenvalues()[i] - 1.0) <= eig_tol) { il = i; break; }
    if (il < 0) throw std::runtime_error("limit_data: adjoint eigenvalue near 1 missing");

    Vector r = right.eigenvectors().col(ir);
    Vector l = left.eigenvectors().col(il);
    Complex denom = l.adjoint() * r;
    if (std::abs(denom) < 1e-12) throw std::runtime_error("limit_data: degenerate eigenvector pairing");
    RenewalLimitData out;
    out.P = (r * l.adjoint()) / denom;
    Complex mu = (l.adjoint() * Rp * r)(0) / denom;
    if (!(mu.real() > 0.0))
        throw std::runtime_error("limit_data: nonpositive Kac coefficient");
    out.mu = mu.real();
    return out;
}

struct GeometricFit {
    double rate = 0.0;       // fitted theta-bar (0 when the deviation is exactly 0)
    double amplitude = 0.0;  // fitted C
    double r_squared = 1.0;
    double max_residual = 0.0;
    bool exact = false;      // deviations below 1e-14 throughout
};

/// Least-squares geometric fit of a nonnegative sequence over its last half.
inline GeometricFit fit_geometric(const std::vector<double>& e, int from, int to) {
    GeometricFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, floor = 1e-14;
    int cnt = 0;
    for (int n = from; n <= to; ++n) {
        if (e[n] < floor) continue;
        double x = n, y = std::log(e[n]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt < 3) { fit.exact = true; return fit; }
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    double icpt = (sy - slope * sx) / cnt;
    fit.rate = std::exp(slope);
    fit.amplitude = std::exp(icpt);
    double ss_res = 0, ss_tot = 0, ybar = sy / cnt;
    for (int n = from; n <= to; ++n) {
        if (e[n] < floor) continue;
        double y = std::log(e[n]), yhat = icpt + slope * n;
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - ybar) * (y - ybar);
        fit.max_residual = std::max(fit.max_residual, std::abs(y - yhat));
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

/// e_n = ||T_n - P/mu|| and its geometric tail fit.
inline GeometricFit limit_check(const RenewalSequence& seq, int n_max) {
    RenewalLimitData data = limit_data(seq);
    auto T = partial_sums(seq, n_max);
    std::vector<double> e(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) e[n] = operator_norm(T[n] - data.P / data.mu);
    return fit_geometric(e, n_max / 2, n_max);
}

// ---------------------------------------------------------------------------
// Perturbed families.

using FamilyBuilder = std::function<RenewalSequence(double)>;

/// Lipschitz certificate: sup_j ||R^s_j - R^0_j|| / |s| over a sample of s.
inline double lipschitz_certificate(const FamilyBuilder& builder, double t) {
    RenewalSequence base = builder(0.0);
    double worst = 0.0;
    for (double s : {t, t / 2, t / 4}) {
        if (s == 0.0) continue;
        RenewalSequence pert = builder(s);
        for (int j = 1; j <= std::min(base.max_index(), pert.max_index()); ++j)
            worst = std::max(worst, operator_norm(pert.blocks[j - 1] - base.blocks[j - 1]) / std::abs(s));
    }
    return worst;
}

inline RenewalSequence perturbed_family(const FamilyBuilder& builder, double t,
                                        double lipschitz_cap = 1e6) {
    double cert = lipschitz_certificate(builder, t);
    if (!(cert < lipschitz_cap))
        throw std::runtime_error("perturbed_family: Lipschitz ratio unbounded (certificate " +
                                 std::to_string(cert) + ")");
    return builder(t);
}

/// Eigenvalue of R(z, t) = sum z^j R^t_j tracked from a seed value.
inline Complex tracked_eigenvalue(const RenewalSequence& seq, Complex z, Complex seed) {
    const int d = seq.dim();
    Matrix R = Matrix::Zero(d, d);
    Complex zp = 1.0;
    for (int j = 1; j <= seq.max_index(); ++j) {
        zp *= z;
        R += zp * seq.blocks[j - 1];
    }
    Eigen::ComplexEigenSolver<Matrix> solver(R, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("tracked_eigenvalue: solver failure");
    int best = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(solver.eigenvalues()[i] - seed) < std::abs(solver.eigenvalues()[best] - seed))
            best = i;
    return solver.eigenvalues()[best];
}

/// gamma(t): the root of lambda(z, t) = 1 near z = 1, by Newton iteration.
inline Complex gamma_root(const FamilyBuilder& builder, double t, int max_steps = 50) {
    RenewalSequence seq = perturbed_family(builder, t);
    Complex z = 1.0, lam_seed = 1.0;
    const double dz = 1e-7;
    for (int step = 0; step < max_steps; ++step) {
        Complex lam = tracked_eigenvalue(seq, z, lam_seed);
        if (std::abs(lam - 1.0) < 1e-13) return z;
        Complex lp = tracked_eigenvalue(seq, z + dz, lam);
        Complex lm = tracked_eigenvalue(seq, z - dz, lam);
        Complex deriv = (lp - lm) / (2.0 * dz);
        if (std::abs(deriv) < 1e-14) throw std::runtime_error("gamma_root: vanishing derivative");
        z -= (lam - 1.0) / deriv;
        lam_seed = lam;
    }
    throw std::runtime_error("gamma_root: Newton did not converge in 50 steps");
}

struct PerturbedFitReport {
    double theta_bar = 0.0;   // geometric rate of the unperturbed tail
    double c = 0.0;           // curvature constant of the (1 - c t^2)^n term
    double amplitude = 0.0;
    bool dominated = false;   // deviations under the fitted two-term envelope
    double max_ratio = 0.0;   // sup_n deviation / envelope
};

/// Deviation d_n = ||T^t_n - (1/mu)(1 - alpha t^2/mu)^n P|| against the
/// two-term envelope C theta^n + C|t|(1 - c t^2)^n of the perturbed renewal
/// theorem. alpha is measured from lambda(1, t) at small t.
inline PerturbedFitReport perturbed_limit_check(const FamilyBuilder& builder, double t,
                                                int n_max) {
    RenewalSequence base = builder(0.0);
    RenewalLimitData data = limit_data(base);
    GeometricFit base_fit = limit_check(base, std::max(n_max / 2, 20));

    // curvature of lambda(1, t) by symmetric Richardson at small t
    double h = std::min(std::abs(t), 0.02);
    if (h == 0.0) h = 0.01;
    auto lam1 = [&](double s) { return tracked_eigenvalue(builder(s), 1.0, 1.0); };
    double s1 = 1.0 - 0.5 * std::real(lam1(h) + lam1(-h));
    double s2 = 1.0 - 0.5 * std::real(lam1(2 * h) + lam1(-2 * h));
    double alpha = (4.0 * s1 / (h * h) - s2 / (4.0 * h * h)) / 3.0;

    RenewalSequence pert = perturbed_family(builder, t);
    auto T = partial_sums(pert, n_max);
    std::vector<double> dev(n_max + 1, 0.0);
    double shrink = 1.0 - alpha * t * t / data.mu;
    double pw = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        pw *= shrink;
        dev[n] = operator_norm(T[n] - (pw / data.mu) * data.P);
    }

    PerturbedFitReport rep;
    rep.theta_bar = base_fit.exact ? 0.0 : base_fit.rate;
    GeometricFit pfit = fit_geometric(dev, n_max / 2, n_max);
    // read c from the perturbed tail rate when it is slower than theta_bar
    double rho = pfit.exact ? 0.0 : pfit.rate;
    rep.c = rho > rep.theta_bar && t != 0.0 ? (1.0 - rho) / (t * t) : alpha / data.mu;
    rep.amplitude = std::max({base_fit.amplitude, pfit.amplitude, 1.0});
    double envelope_c = std::max(rep.c, 0.0);
    rep.dominated = true;
    for (int n = 1; n <= n_max; ++n) {
        double env = 2.0 * rep.amplitude *
                     (std::pow(std::max(rep.theta_bar, 1e-6), n) +
                      std::abs(t) * std::pow(std::max(1.0 - envelope_c * t * t, 0.0), n)) +
                     1e-12;
        rep.max_ratio = std::max(rep.max_ratio, dev[n] / env);
        if (dev[n] > env) rep.dominated = false;
    }
    return rep;
}

}  // namespace farey::renewal
