#pragma once

// Discretized twisted transfer operators for the induced Farey map T_Y:
//
//   (L_{k,z} v)(x) = sum_{i+j+1 <= rmax} z^r 2^{-r} e^{-i k theta phi_Y(h x)} v(h x),
//
// with h = h_{i,j} the inverse branch on I_{i,j}, r = i+j+1, theta = 2 pi/log r
// the fiber frequency unit, and the jacobian J = 2^{-r} exact for mu_Y.
// Renewal blocks R_{n,k} restrict the sum to branches with r = n.
// Collocation is Chebyshev barycentric on [1/3, 1/2]; the singular measure
// enters only through mass-coordinate quadrature (minkowski.hpp).

#include "farey/dynamics.hpp"
#include "farey/grid.hpp"
#include "farey/minkowski.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace farey {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kdefault_rmax = 40;

/// sum_{n > rmax} (n-1) 2^{-n} = (rmax + 1) 2^{-rmax}, the truncated branch mass.
inline double branch_tail_mass(int rmax) {
    return (rmax + 1) * std::ldexp(1.0, -rmax);
}

/// Precomputed branch data: the Moebius map of h_{i,j} plus the suffix maps
/// giving the intermediate orbit points T^m(h x) as functions of the image.
struct BranchData {
    BranchIndex idx;
    int r = 0;
    Moebius map;                    // h_{i,j}
    std::vector<Moebius> suffixes;  // suffixes[m] maps y -> T^m(h y), m = 0..r-1
};

struct BranchTable {
    int rmax = 0;
    double tail = 0.0;
    std::vector<BranchData> branches;
};

inline BranchTable build_branch_table(int rmax) {
    if (rmax < 5) throw std::invalid_argument("branch table: need rmax >= 5");
    BranchTable t;
    t.rmax = rmax;
    t.tail = branch_tail_mass(rmax);
    for (int r = 2; r <= rmax; ++r) {
        for (int i = 1; i <= r - 1; ++i) {
            BranchData b;
            b.idx = BranchIndex{i, r - 1 - i};
            b.r = r;
            b.suffixes.resize(r);
            // word letters in orbit order: A, then i times B, then j times A
            std::vector<const Moebius*> letters;
            letters.push_back(&kMatA);
            for (int k = 0; k < i; ++k) letters.push_back(&kMatB);
            for (int k = 0; k < b.idx.j; ++k) letters.push_back(&kMatA);
            Moebius acc{1, 0, 0, 1};
            for (int m = r - 1; m >= 0; --m) {
                acc = letters[m]->compose(acc);
                b.suffixes[m] = acc;
            }
            b.map = b.suffixes[0];
            t.branches.push_back(std::move(b));
        }
    }
    return t;
}

/// Shared discretization context.
struct TransferContext {
    ChebGrid grid;
    BranchTable branches;
    double modulus = std::numbers::ln2;  // log r of the fiber

    TransferContext(int grid_size, int rmax, double fiber_r = 2.0)
        : grid(kY_left, kY_right, grid_size),
          branches(build_branch_table(rmax)),
          modulus(std::log(fiber_r)) {}

    double theta() const { return 2.0 * std::numbers::pi / modulus; }
};

struct TransferParams {
    int k = 0;
    Complex z = Complex(1.0, 0.0);
    double t = 0.0;
};

struct DiscretizedOperator {
    Matrix matrix;
    int truncation_rmax = 0;
    double tail = 0.0;
    int frequency_band = 0;  // K; 0 for scalar-frequency operators
    TransferParams params;
};

inline void check_z_radius(Complex z) {
    // convergence radius of the branch series is 2; keep a safety margin
    const double cap = std::exp(std::numbers::ln2 / 4.0);
    if (std::abs(z) > cap)
        throw std::domain_error("transfer: |z| beyond safe convergence radius e^{log2/4}");
}

/// (L_{k,z} v)(x_m) with v read through barycentric interpolation.
inline GridFunction apply_transfer(const TransferContext& ctx, int k, Complex z,
                                   const GridFunction& v) {
    check_z_radius(z);
    const double th = ctx.theta();
    GridFunction out(ctx.grid);
    for (int m = 0; m < ctx.grid.size(); ++m) {
        const double x = ctx.grid.nodes[m];
        Complex acc(0.0);
        for (const auto& b : ctx.branches.branches) {
            double u = b.map.apply(x);
            double phiY = branch_phi_Y(b.map, x);
            Complex w = std::pow(z, b.r) * std::ldexp(1.0, -b.r) *
                        std::exp(Complex(0.0, -k * th * phiY));
            acc += w * v.eval(u);
        }
        out.values[m] = acc;
    }
    return out;
}

namespace detail {

/// Adds sum over `branches` of diag(coeff_b) * InterpRow(h_b(x_m)) to `mat`.
template <typename BranchFilter, typename Coeff>
void accumulate_operator(const TransferContext& ctx, Matrix& mat,
                         BranchFilter&& keep, Coeff&& coeff) {
    const int G = ctx.grid.size();
    for (const auto& b : ctx.branches.branches) {
        if (!keep(b)) continue;
        for (int m = 0; m < G; ++m) {
            const double x = ctx.grid.nodes[m];
            double u = b.map.apply(x);
            Complex w = coeff(b, x);
            auto row = ctx.grid.interp_row(u);
            for (int l = 0; l < G; ++l) mat(m, l) += w * row[l];
        }
    }
}

}  // namespace detail

inline DiscretizedOperator build_matrix(const TransferContext& ctx, int k, Complex z) {
    check_z_radius(z);
    const double th = ctx.theta();
    DiscretizedOperator op;
    op.truncation_rmax = ctx.branches.rmax;
    op.tail = ctx.branches.tail;
    op.params = TransferParams{k, z, 0.0};
    op.matrix = Matrix::Zero(ctx.grid.size(), ctx.grid.size());
    detail::accumulate_operator(
        ctx, op.matrix, [](const BranchData&) { return true; },
        [&](const BranchData& b, double x) {
            return std::pow(z, b.r) * std::ldexp(1.0, -b.r) *
                   std::exp(Complex(0.0, -k * th * branch_phi_Y(b.map, x)));
        });
    return op;
}

/// R_{n,k}: branch sum restricted to return time n (n-1 branches).
inline DiscretizedOperator renewal_block(const TransferContext& ctx, int n, int k) {
    if (n < 2) throw std::invalid_argument("renewal_block: minimum return time is 2");
    if (n > ctx.branches.rmax) throw std::invalid_argument("renewal_block: n > rmax");
    const double th = ctx.theta();
    DiscretizedOperator op;
    op.truncation_rmax = ctx.branches.rmax;
    op.tail = ctx.branches.tail;
    op.params = TransferParams{k, Complex(1.0), 0.0};
    op.matrix = Matrix::Zero(ctx.grid.size(), ctx.grid.size());
    detail::accumulate_operator(
        ctx, op.matrix, [n](const BranchData& b) { return b.r == n; },
        [&](const BranchData& b, double x) {
            return std::ldexp(1.0, -b.r) *
                   std::exp(Complex(0.0, -k * th * branch_phi_Y(b.map, x)));
        });
    return op;
}

/// T_{n,k} for n = 0..n_max by the convolution recursion
/// T_n = sum_{j=2}^{min(n,rmax)} R_j T_{n-j}, T_0 = I.
inline std::vector<Matrix> t_sequence(const TransferContext& ctx, int k, int n_max) {
    if (n_max > 200) throw std::invalid_argument("t_sequence: n_max > 200 (dense budget)");
    const int G = ctx.grid.size();
    std::vector<Matrix> blocks(ctx.branches.rmax + 1);
    for (int n = 2; n <= ctx.branches.rmax; ++n) blocks[n] = renewal_block(ctx, n, k).matrix;
    std::vector<Matrix> T(n_max + 1);
    T[0] = Matrix::Identity(G, G);
    for (int n = 1; n <= n_max; ++n) {
        T[n] = Matrix::Zero(G, G);
        for (int j = 2; j <= std::min(n, ctx.branches.rmax); ++j) T[n] += blocks[j] * T[n - j];
    }
    return T;
}

struct SpectralResult {
    double radius = 0.0;
    Complex leading;
    Vector eigenvector;
    double gap = 0.0;  // |lambda_1| - |lambda_2|
};

inline SpectralResult spectral_analysis(const Matrix& m) {
    Eigen::ComplexEigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_analysis: eigensolver failed to converge");
    const auto& ev = solver.eigenvalues();
    int lead = 0, second = -1;
    for (int i = 1; i < ev.size(); ++i)
        if (std::abs(ev[i]) > std::abs(ev[lead])) lead = i;
    for (int i = 0; i < ev.size(); ++i) {
        if (i == lead) continue;
        if (second < 0 || std::abs(ev[i]) > std::abs(ev[second])) second = i;
    }
    SpectralResult r;
    r.leading = ev[lead];
    r.radius = std::abs(ev[lead]);
    r.eigenvector = solver.eigenvectors().col(lead);
    r.gap = second >= 0 ? r.radius - std::abs(ev[second]) : r.radius;
    return r;
}

inline double spectral_radius(const DiscretizedOperator& op) {
    return spectral_analysis(op.matrix).radius;
}

// ---------------------------------------------------------------------------
// Frequency-coupled perturbed operator (Fourier in the fiber direction).

using SkewObservable = std::function<double(const SkewPoint&)>;

/// psi_Y(x, w) evaluated from precomputed branch data: x = h_b(y) and the
/// orbit points are the suffix images of y.
inline double branch_induced_psi(const SkewObservable& psi, const BranchData& b,
                                 double y, double omega, double modulus) {
    double acc = 0.0, w = omega;
    for (int m = 0; m < b.r; ++m) {
        double xm = b.suffixes[m].apply(y);
        acc += psi(SkewPoint{xm, fiber_mod(w, modulus), modulus});
        w += phi(xm);
    }
    return acc;
}

struct FourierCoefficientTable {
    double t = 0.0;
    int d_max = 0;
    double alias_tail = 0.0;                 // largest discarded-band magnitude seen
    std::vector<GridFunction> coefficients;  // index d + d_max
    GridFunction& coeff(int d) { return coefficients[d + d_max]; }
    const GridFunction& coeff(int d) const { return coefficients[d + d_max]; }
};

namespace detail {

/// Fourier coefficients along the fiber of e^{i t psi_Y(x, .)} at one point x,
/// for |d| <= d_max, by M-point uniform sampling. Returns the coefficients and
/// the largest magnitude in the discarded outer half-band (alias estimate).
inline std::pair<std::vector<Complex>, double> fiber_fourier(
    const SkewObservable& psi, const BranchData& b, double y, double t,
    int d_max, int M, double modulus) {
    std::vector<Complex> samples(M);
    for (int s = 0; s < M; ++s) {
        double w = modulus * s / M;
        samples[s] = std::exp(Complex(0.0, t * branch_induced_psi(psi, b, y, w, modulus)));
    }
    const double two_pi = 2.0 * std::numbers::pi;
    auto dft = [&](int d) {
        Complex acc(0.0);
        for (int s = 0; s < M; ++s)
            acc += samples[s] * std::exp(Complex(0.0, -two_pi * d * s / M));
        return acc / double(M);
    };
    std::vector<Complex> out(2 * d_max + 1);
    for (int d = -d_max; d <= d_max; ++d) out[d + d_max] = dft(d);
    double alias = 0.0;
    for (int d = d_max + 1; d <= std::min(2 * d_max + 4, M / 2 - 1); ++d)
        alias = std::max({alias, std::abs(dft(d)), std::abs(dft(-d))});
    return {std::move(out), alias};
}

}  // namespace detail

/// Coefficient table F_d(x) of e^{i t psi_Y(x, .)} at the grid nodes.
inline FourierCoefficientTable fourier_table(const TransferContext& ctx,
                                             const SkewObservable& psi, double t,
                                             int d_max, int m_omega) {
    if (m_omega < 8 * d_max || (m_omega & (m_omega - 1)) != 0)
        throw std::invalid_argument("fourier_table: m_omega must be a power of two >= 8*d_max");
    FourierCoefficientTable table;
    table.t = t;
    table.d_max = d_max;
    table.coefficients.assign(2 * d_max + 1, GridFunction(ctx.grid));
    for (int m = 0; m < ctx.grid.size(); ++m) {
        const double x = ctx.grid.nodes[m];
        // Locate the branch cell [h_b(1/3), h_b(1/2)] containing x.  Grid
        // endpoints sit on a cell boundary (where first-return iteration
        // would not terminate), so fall back to the nearest tabulated cell;
        // the omitted branches carry only the truncation tail mass.
        const BranchData* best = nullptr;
        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& cand : ctx.branches.branches) {
            double e1 = cand.map.apply(kY_left), e2 = cand.map.apply(kY_right);
            if (e2 < e1) std::swap(e1, e2);
            double dist = std::max({e1 - x, x - e2, 0.0});
            if (dist < best_dist) { best_dist = dist; best = &cand; }
        }
        const BranchData& b = *best;
        // y = T_Y x is the Moebius preimage of x under the branch map.
        double y = (b.map.d * x - b.map.b) / (b.map.a - b.map.c * x);
        y = std::min(std::max(y, kY_left), kY_right);
        auto [coeffs, alias] = detail::fiber_fourier(psi, b, y, t, d_max, m_omega, ctx.modulus);
        table.alias_tail = std::max(table.alias_tail, alias);
        for (int d = -d_max; d <= d_max; ++d) table.coeff(d).values[m] = coeffs[d + d_max];
    }
    if (table.alias_tail > 1e-6)
        throw std::runtime_error("fourier_table: discarded coefficient mass exceeds 1e-6; enlarge the band");
    return table;
}

/// Block operator on (v_l)_{|l| <= K}: block (k,l) discretizes
/// v -> L_k(F^{(t)}_{k-l} v). Block-diagonal with blocks L_k at t = 0.
inline DiscretizedOperator perturbed_operator(const TransferContext& ctx,
                                              const SkewObservable& psi, double t,
                                              int k_freq, double t_cap = 0.5) {
    if (std::abs(t) > t_cap) throw std::domain_error("perturbed_operator: |t| beyond cap");
    if (k_freq < 4) throw std::invalid_argument("perturbed_operator: need K >= 4");
    const int G = ctx.grid.size();
    const int K = k_freq;
    const int B = 2 * K + 1;
    const int d_max = 2 * K;
    int m_omega = 64;
    while (m_omega < 8 * d_max) m_omega <<= 1;
    const double th = ctx.theta();

    DiscretizedOperator op;
    op.truncation_rmax = ctx.branches.rmax;
    op.tail = ctx.branches.tail;
    op.frequency_band = K;
    op.params = TransferParams{0, Complex(1.0), t};
    op.matrix = Matrix::Zero(B * G, B * G);

    double alias_seen = 0.0;
    for (const auto& b : ctx.branches.branches) {
        for (int m = 0; m < G; ++m) {
            const double y = ctx.grid.nodes[m];
            const double u = b.map.apply(y);
            const double phiY = branch_phi_Y(b.map, y);
            auto [coeffs, alias] = detail::fiber_fourier(psi, b, y, t, d_max, m_omega, ctx.modulus);
            alias_seen = std::max(alias_seen, alias);
            auto row = ctx.grid.interp_row(u);
            const double jac = std::ldexp(1.0, -b.r);
            for (int k = -K; k <= K; ++k) {
                const Complex twist = jac * std::exp(Complex(0.0, -k * th * phiY));
                for (int l = -K; l <= K; ++l) {
                    const Complex w = twist * coeffs[(k - l) + d_max];
                    if (std::abs(w) < 1e-16) continue;
                    const int ro = (k + K) * G + m, co = (l + K) * G;
                    for (int q = 0; q < G; ++q) op.matrix(ro, co + q) += w * row[q];
                }
            }
        }
    }
    if (alias_seen > 1e-6)
        throw std::runtime_error("perturbed_operator: Fourier band too small (alias tail > 1e-6)");
    return op;
}

// ---------------------------------------------------------------------------
// Eigenvalue branch tracking and the curvature of lambda(1, t).

struct EigenTrackPoint {
    double t = 0.0;
    Complex lambda;
};

/// The eigenvalue branch of the perturbed operator continuous in t from
/// lambda(1,0) = 1, tracked by eigenvector overlap.
inline std::vector<EigenTrackPoint> track_lambda(const TransferContext& ctx,
                                                 const SkewObservable& psi,
                                                 const std::vector<double>& t_values,
                                                 int k_freq) {
    // walk outward from 0 separately on each sign so each step is small
    std::vector<double> pos, neg;
    for (double t : t_values) (t >= 0 ? pos : neg).push_back(t);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end(), std::greater<>());

    auto op0 = perturbed_operator(ctx, psi, 0.0, k_freq);
    auto base = spectral_analysis(op0.matrix);

    auto track_side = [&](const std::vector<double>& side) {
        std::vector<EigenTrackPoint> out;
        Vector prev = base.eigenvector;
        for (double t : side) {
            auto op = perturbed_operator(ctx, psi, t, k_freq);
            Eigen::ComplexEigenSolver<Matrix> solver(op.matrix, true);
            if (solver.info() != Eigen::Success)
                throw std::runtime_error("track_lambda: eigensolver failure");
            const auto& ev = solver.eigenvalues();
            int best = 0, runner = -1;
            double best_ov = -1.0, runner_ov = -1.0;
            for (int i = 0; i < ev.size(); ++i) {
                double ov = std::abs(prev.dot(solver.eigenvectors().col(i)));
                if (ov > best_ov) {
                    runner = best; runner_ov = best_ov;
                    best = i; best_ov = ov;
                } else if (ov > runner_ov) {
                    runner = i; runner_ov = ov;
                }
            }
            if (runner >= 0 && std::abs(ev[best] - ev[runner]) < 1e-3 && runner_ov > 0.5 * best_ov)
                throw std::runtime_error("track_lambda: eigenvalue branch crossing (gap < 1e-3)");
            prev = solver.eigenvectors().col(best);
            out.push_back(EigenTrackPoint{t, ev[best]});
        }
        return out;
    };

    auto p = track_side(pos), n = track_side(neg);
    std::vector<EigenTrackPoint> all(n.rbegin(), n.rend());
    all.insert(all.end(), p.begin(), p.end());
    return all;
}

/// alpha-hat with 1 - lambda(1,t) = alpha t^2 + O(t^3), by Richardson-
/// extrapolated symmetric differences on the grid {+-h, +-2h}.
inline double lambda_curvature(const TransferContext& ctx, const SkewObservable& psi,
                               double h, int k_freq) {
    if (!(h > 0.0) || h > 0.05) throw std::invalid_argument("lambda_curvature: need 0 < h <= 0.05");
    auto pts = track_lambda(ctx, psi, {-2 * h, -h, h, 2 * h}, k_freq);
    auto lam = [&](double t) {
        for (const auto& p : pts)
            if (std::abs(p.t - t) < 1e-15) return p.lambda;
        throw std::logic_error("lambda_curvature: missing grid point");
    };
    double s1 = 1.0 - 0.5 * std::real(lam(h) + lam(-h));         // alpha h^2 + gamma h^4
    double s2 = 1.0 - 0.5 * std::real(lam(2 * h) + lam(-2 * h)); // 4 alpha h^2 + 16 gamma h^4
    return (4.0 * s1 / (h * h) - s2 / (4.0 * h * h)) / 3.0;
}

// ---------------------------------------------------------------------------
// Dolgopyat decay probe: per-step geometric decay of ||L_k^n 1||_{L^4(mu_Y)}.
// The analytic cone norm is replaced by the L^4 node-value norm; results are
// a numerical proxy only.

struct DecayProbeEntry {
    int k = 0;
    double factor = 0.0;  // fitted per-step decay of the L4 norm
};

inline double l4_norm_mu_Y(const TransferContext& ctx, const GridFunction& v,
                           const MeasureNodeSet& quad) {
    double acc = 0.0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        double a = std::abs(v.eval(quad.nodes[i]));
        acc += quad.weights[i] * a * a * a * a;
    }
    return std::pow(acc, 0.25);
}

inline std::vector<DecayProbeEntry> dolgopyat_decay_probe(const TransferContext& ctx,
                                                          const std::vector<int>& k_list,
                                                          int n_steps,
                                                          int quad_nodes = 2000) {
    MeasureNodeSet quad = mu_Y_nodes(quad_nodes);
    std::vector<DecayProbeEntry> out;
    for (int k : k_list) {
        auto op = build_matrix(ctx, k, Complex(1.0));
        GridFunction v(ctx.grid);
        std::fill(v.values.begin(), v.values.end(), Complex(1.0));
        std::vector<double> lognorm;
        Vector vec = Vector::Ones(ctx.grid.size());
        for (int n = 1; n <= n_steps; ++n) {
            vec = op.matrix * vec;
            for (int m = 0; m < ctx.grid.size(); ++m) v.values[m] = vec[m];
            lognorm.push_back(std::log(l4_norm_mu_Y(ctx, v, quad)));
        }
        // least-squares slope over the last half of the range
        int n0 = n_steps / 2;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int n = n0; n < n_steps; ++n) {
            double xx = n, yy = lognorm[n];
            sx += xx; sy += yy; sxx += xx * xx; sxy += xx * yy;
            ++cnt;
        }
        double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        out.push_back(DecayProbeEntry{k, std::exp(slope)});
    }
    return out;
}

}  // namespace farey
