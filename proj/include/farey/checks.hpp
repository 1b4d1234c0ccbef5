#pragma once

// Structural verifications for the induced system: the cohomology witness on
// a period-2 orbit, periodic-orbit obstructions for general branch words, the
// covering/mass-comparison (weak Federer) probe with exact measure masses,
// and the expanding-tower condition audit.

#include <farey/dynamics.hpp>
#include <farey/minkowski.hpp>
#include <farey/rational.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace farey::checks {

// ---------------------------------------------------------------------------
// Cohomology witness.

/// K_n = preimage in Y_0 = (1/3, 1/2) of the n-th cell adjacent to 1 under
/// one step of the map: exactly (n/(2n+1), (n+1)/(2n+3)).
inline std::pair<Rational, Rational> covering_interval(int n) {
    if (n < 1) throw std::invalid_argument("covering_interval: n < 1");
    return {Rational(n, 2 * n + 1), Rational(n + 1, 2 * n + 3)};
}

struct CohomologyWitness {
    double x = 0.0;        // fixed point of the (1,0) branch
    double x_prime = 0.0;  // fixed point of the (2,0) branch
    double y = 0.0;        // period-2 point through I_{1,0} and I_{2,0}
    double value = 0.0;    // phi_Y(y) + phi_Y(T_Y y) - phi_Y(x) - phi_Y(x')
};

/// Return-time potential summed over the period-2 orbit of y = 1 - sqrt(6)/4,
/// minus its values at the branch fixed points x = 3/2 - sqrt(5)/2 and
/// x' = 1 - sqrt(3)/3.  A nonzero value witnesses that the potential is not
/// cohomologous to a function constant on each branch cell.
inline CohomologyWitness cohomology_witness() {
    CohomologyWitness w;
    w.x = 1.5 - std::sqrt(5.0) / 2.0;
    w.x_prime = 1.0 - std::sqrt(3.0) / 3.0;
    w.y = 1.0 - std::sqrt(6.0) / 4.0;

    ReturnRecord rx = return_data(w.x);
    if (!(rx.branch == BranchIndex{1, 0}) || std::abs(rx.image - w.x) > 1e-12)
        throw std::runtime_error("cohomology_witness: x is not the (1,0) branch fixed point");
    ReturnRecord rxp = return_data(w.x_prime);
    if (!(rxp.branch == BranchIndex{2, 0}) || std::abs(rxp.image - w.x_prime) > 1e-12)
        throw std::runtime_error("cohomology_witness: x' is not the (2,0) branch fixed point");
    ReturnRecord ry = return_data(w.y);
    if (!(ry.branch == BranchIndex{1, 0}))
        throw std::runtime_error("cohomology_witness: y not in the (1,0) branch cell");
    ReturnRecord ry2 = return_data(ry.image);
    if (!(ry2.branch == BranchIndex{2, 0}))
        throw std::runtime_error("cohomology_witness: T_Y y not in the (2,0) branch cell");
    if (std::abs(ry2.image - w.y) > 1e-12)
        throw std::runtime_error("cohomology_witness: y is not 2-periodic");

    w.value = ry.phi_sum + ry2.phi_sum - rx.phi_sum - rxp.phi_sum;
    return w;
}

// ---------------------------------------------------------------------------
// Periodic-orbit obstruction.

struct OrbitWitness {
    std::vector<BranchIndex> word;
    double point = 0.0;          // periodic point realizing the word
    double birkhoff_value = 0.0; // cycle sum of phi_Y - phi_Y(branch fixed point)
};

/// Birkhoff sum, along the periodic orbit of the branch word, of the function
/// equal on each branch cell to phi_Y minus its value at that cell's fixed
/// point.  Recomputed by two independent routes (forward orbit sums and the
/// Moebius closed form); they must agree to 1e-10.
inline OrbitWitness orbit_obstruction(const std::vector<BranchIndex>& word) {
    if (word.empty() || word.size() > 12)
        throw std::invalid_argument("orbit_obstruction: need 1 <= |word| <= 12");
    OrbitWitness wit;
    wit.word = word;
    wit.point = branch_word_fixed_point(word);

    double forward = 0.0, pullback = 0.0;
    double cur = wit.point;
    for (const BranchIndex& b : word) {
        ReturnRecord rec = return_data(cur);
        if (!(rec.branch == b))
            throw std::runtime_error("orbit_obstruction: orbit leaves the stated branch word");
        double fixed = branch_word_fixed_point({b});
        ReturnRecord fix = return_data(fixed);
        forward += rec.phi_sum - fix.phi_sum;
        Moebius m = branch_matrix(b);
        pullback += branch_phi_Y(m, rec.image) - branch_phi_Y(m, fixed);
        cur = rec.image;
    }
    if (std::abs(cur - wit.point) > 1e-9)
        throw std::runtime_error("orbit_obstruction: word orbit does not close");
    if (std::abs(forward - pullback) > 1e-10)
        throw std::runtime_error("orbit_obstruction: dual-route Birkhoff sums disagree");
    wit.birkhoff_value = forward;
    return wit;
}

// ---------------------------------------------------------------------------
// Covering / mass-comparison probe.

struct FedererScale {
    double eta = 0.0;
    int branches_kept = 0;      // covering intervals with length >= C eta
    int set_count = 0;          // p: sets A_1..A_p on the remainder
    double d_geometry = 0.0;    // min D with A_i inside B(x_i, D C eta)
    double d_mass = 0.0;        // max over witnesses of mu(A_i)/mu(B(x', eta))
    double d_achieved = 0.0;
    double defect_mass = 0.0;   // exact uncovered mass of Y_0
};

struct FedererReport {
    double C = 0.0;
    std::vector<FedererScale> scales;
    double d_max = 0.0;
    double d_median = 0.0;
};

namespace detail {

inline double dyadic_ratio(const DyadicRational& num, const DyadicRational& den) {
    return std::exp2(num.log2d() - den.log2d());
}

/// One scale of the covering construction on Y_0 = (1/3, 1/2): keep the
/// covering intervals K_1..K_N of length >= C eta, cut the remainder
/// (right-anchored) into J_0..J_p with |J_i| = 2 C eta for i >= 1 and
/// |J_0| in [2 C eta, 4 C eta); sets A_1 = J_0 u J_1, A_i = J_i; balls
/// B_i = J_{i-1} for i > 1 and the leftmost piece of J_0 for i = 1.
inline FedererScale federer_scale(const Rational& C, const Rational& eta) {
    FedererScale sc;
    sc.eta = eta.to_double();
    Rational c_eta = C * eta;
    int N = 0;
    while (true) {
        auto [lo, hi] = covering_interval(N + 1);
        if ((hi - lo) < c_eta) break;
        ++N;
        if (N > 2000000) throw std::runtime_error("federer_scale: runaway branch count");
    }
    if (N < 1) throw std::runtime_error("federer_scale: eta too coarse (no branch kept)");
    sc.branches_kept = N;

    Rational rem_left = covering_interval(N).second;
    Rational rem_right(1, 2);
    Rational step = Rational(2, 1) * c_eta;
    Rational len = rem_right - rem_left;
    // number of full steps from the right so that the leftover J_0 has
    // length in [2 C eta, 4 C eta): p = floor(len / step) - 1
    BigInt q = (len.num * step.den) / (len.den * step.num);
    int p = static_cast<int>(q.convert_to<long>()) - 1;
    if (p < 2) throw std::runtime_error("federer_scale: scale too coarse (p < 2)");
    sc.set_count = p;

    // cut points: J_0 = [rem_left, r_p], J_i = [r_{p-i+1}, r_{p-i}] with
    // r_k = 1/2 - k * 2 C eta
    auto cut = [&](int k) { return rem_right - Rational(BigInt(k), 1) * step; };
    std::vector<std::pair<Rational, Rational>> J(p + 1);
    J[0] = {rem_left, cut(p)};
    for (int i = 1; i <= p; ++i) J[i] = {cut(p - i + 1), cut(p - i)};

    DyadicRational covered(BigInt(0), 0);
    for (int n = 1; n <= N; ++n) {
        auto [lo, hi] = covering_interval(n);
        covered = dyadic_add(covered, mu_mass(lo, hi));
    }

    double dgeo = 0.0, dmass = 0.0;
    const Rational half(1, 2);
    for (int i = 1; i <= p; ++i) {
        // ball center and radius C eta
        Rational blo = i == 1 ? J[0].first : J[i - 1].first;
        Rational bhi = blo + step;
        Rational center = blo + c_eta;
        // A_i
        Rational alo = i == 1 ? J[0].first : J[i].first;
        Rational ahi = i == 1 ? J[1].second : J[i].second;
        DyadicRational a_mass = mu_mass(alo, ahi);
        covered = dyadic_add(covered, a_mass);
        // geometry: A_i inside B(center, D * C eta)
        Rational reach = ahi - center;
        if (reach < center - alo) reach = center - alo;
        dgeo = std::max(dgeo, reach.to_double() / c_eta.to_double());
        // mass comparison on a witness grid x' in B(center, (C-1) eta)
        Rational span = (C - Rational(1, 1)) * eta;
        for (int s = -2; s <= 2; ++s) {
            Rational xp = center + Rational(s, 2) * span;
            DyadicRational ball_mass = mu_mass(xp - eta, xp + eta);
            dmass = std::max(dmass, dyadic_ratio(a_mass, ball_mass));
        }
    }
    sc.d_geometry = dgeo;
    sc.d_mass = dmass;
    sc.d_achieved = std::max(dgeo, dmass);
    DyadicRational total = mu_mass(Rational(1, 3), half);
    DyadicRational defect = dyadic_sub(total, covered);
    sc.defect_mass = defect.numerator == 0 ? 0.0
                     : defect.numerator > 0 ? std::exp2(defect.log2d())
                                            : -1.0;  // negative: overlap bug
    return sc;
}

}  // namespace detail

/// Runs the explicit covering construction at each scale and reports the
/// achieved mass-comparison constants.  Note the quantifier order of the
/// underlying property: a finite-scale probe can falsify boundedness but
/// never certify it.
inline FedererReport federer_probe(const Rational& C, const std::vector<int>& eta_exponents) {
    if (!(Rational(1, 1) < C)) throw std::invalid_argument("federer_probe: need C > 1");
    FedererReport rep;
    rep.C = C.to_double();
    std::vector<double> ds;
    for (int m : eta_exponents) {
        if (m < 7) throw std::invalid_argument("federer_probe: need eta <= 1/100 (m >= 7)");
        Rational eta(BigInt(1), BigInt(1) << m);
        FedererScale sc = detail::federer_scale(C, eta);
        rep.scales.push_back(sc);
        ds.push_back(sc.d_achieved);
    }
    std::sort(ds.begin(), ds.end());
    rep.d_max = ds.back();
    rep.d_median = ds[ds.size() / 2];
    return rep;
}

// ---------------------------------------------------------------------------
// Expanding-tower audit.

struct TailIntegral {
    double value = 0.0;      // partial sum of sum_r (r-1) 2^{-r-2} e^{sigma r}
    double closed_form = 0.0;  // x^2 / (4 (1-x)^2), x = e^sigma / 2, when x < 1
    bool divergent = false;
};

inline TailIntegral return_time_tail(double sigma, int r_cap = 30000) {
    TailIntegral out;
    double x = std::exp(sigma) / 2.0;
    if (x >= 1.0) {
        out.divergent = true;
        double term = 0.0;
        for (int r = 2; r <= 100; ++r) {
            term = (r - 1) * std::pow(x, r) / 4.0;
            out.value += term;
        }
        return out;  // partial sums grow; value is a 100-term snapshot
    }
    out.closed_form = x * x / (4.0 * (1.0 - x) * (1.0 - x));
    for (int r = 2; r <= r_cap; ++r) {
        double term = (r - 1) * std::pow(x, r) / 4.0;
        out.value += term;
        if (term < 1e-16 * out.value) break;
    }
    return out;
}

struct TowerAuditReport {
    double kappa_min = 0.0;            // min branch-map expansion over r <= r_max
    double fixed_point_expansion = 0.0;  // |T_Y'| at the (1,0) branch fixed point
    bool jacobian_locally_constant = false;  // exact-mass check of J = 2^r per branch
    double sup_intermediate = 0.0;     // sup |(T^k o h)'| over branches, k, grid
    double sigma0 = 0.0;
    TailIntegral tail;
};

/// Exact check that each branch multiplies measure masses by exactly 2^{-r}:
/// mu(h(E)) * 2^r == mu(E) in dyadic arithmetic for rational subintervals E.
inline bool jacobian_constant_check(int r_max = 8) {
    const Rational probes[] = {Rational(1, 3), Rational(3, 8), Rational(2, 5),
                               Rational(3, 7), Rational(1, 2)};
    for (int r = 2; r <= r_max; ++r) {
        for (int i = 1; i <= r - 1; ++i) {
            Moebius m = branch_matrix(BranchIndex{i, r - 1 - i});
            auto map = [&](const Rational& y) {
                return Rational(BigInt(m.a) * y.num + BigInt(m.b) * y.den,
                                BigInt(m.c) * y.num + BigInt(m.d) * y.den);
            };
            for (int k = 0; k + 1 < 5; ++k) {
                DyadicRational inside = mu_mass(probes[k], probes[k + 1]);
                DyadicRational image = mu_mass(map(probes[k]), map(probes[k + 1]));
                DyadicRational scaled =
                    image.exponent >= r
                        ? DyadicRational(image.numerator, image.exponent - r)
                        : DyadicRational(image.numerator << (r - image.exponent), 0);
                if (!(scaled == inside)) return false;
            }
        }
    }
    return true;
}

inline TowerAuditReport tower_audit(int r_max = 30, int grid_points = 200) {
    TowerAuditReport rep;
    rep.kappa_min = std::numeric_limits<double>::infinity();
    rep.sup_intermediate = 0.0;
    for (int r = 2; r <= r_max; ++r) {
        for (int i = 1; i <= r - 1; ++i) {
            BranchIndex b{i, r - 1 - i};
            // letters of the branch word: one A, i B's, j A's; suffix products
            std::vector<Moebius> letters;
            letters.push_back(kMatA);
            for (int k = 0; k < b.i; ++k) letters.push_back(kMatB);
            for (int k = 0; k < b.j; ++k) letters.push_back(kMatA);
            std::vector<Moebius> suffix(letters.size() + 1, Moebius{1, 0, 0, 1});
            for (int k = static_cast<int>(letters.size()) - 1; k >= 0; --k)
                suffix[k] = letters[k].compose(suffix[k + 1]);
            for (int g = 0; g < grid_points; ++g) {
                double y = kY_left + (g + 0.5) * (kY_right - kY_left) / grid_points;
                double expansion = 1.0 / std::abs(suffix[0].derivative(y));
                rep.kappa_min = std::min(rep.kappa_min, expansion);
                for (std::size_t k = 1; k < suffix.size(); ++k)
                    rep.sup_intermediate =
                        std::max(rep.sup_intermediate, std::abs(suffix[k].derivative(y)));
            }
        }
    }
    double xf = 1.5 - std::sqrt(5.0) / 2.0;
    rep.fixed_point_expansion = 1.0 / std::abs(branch_matrix(BranchIndex{1, 0}).derivative(xf));
    rep.jacobian_locally_constant = jacobian_constant_check();
    rep.sigma0 = 0.5 * std::numbers::ln2;
    rep.tail = return_time_tail(rep.sigma0);
    return rep;
}

}  // namespace farey::checks
