#pragma once

// The Farey map T, the skew-product (x,w) -> (Tx, w + phi(x)) on
// [0,1] x R/(log r)Z, the induced first-return map T_Y on Y = (1/3, 1/2)
// with its countable Markov partition {I_{i,j}}, and the tower model.
//
// Branch convention. A point of Y is mapped by T into (1/2,1), spends i >= 1
// iterates there, lands in I_{j+1} (j >= 0 further iterates in (0,1/2)\Y),
// and returns to Y after r = i + j + 1 steps. The inverse branch of T^r on
// I_{i,j} is h_A o h_B^i o h_A^j, a Moebius map with matrix A B^i A^j where
// A = [[1,0],[1,1]] and B = [[0,1],[-1,2]]. This is verified by round-trip
// at startup rather than assumed (verify_branch_convention below).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace farey {

inline constexpr double kY_left = 1.0 / 3.0;
inline constexpr double kY_right = 0.5;

/// T(x) = x/(1-x) on [0,1/2), 2 - 1/x on [1/2,1]. x = 1/2 goes right.
inline double farey_map(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("farey_map: x outside [0,1]");
    if (x < 0.5) return x / (1.0 - x);
    return 2.0 - 1.0 / x;
}

/// phi(x) = log(1-x) on [0,1/2), log(x) on [1/2,1]; always <= 0.
inline double phi(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("phi: x outside [0,1]");
    if (x < 0.5) return std::log1p(-x);
    return std::log(x);
}

// Inverse branches of T and their fiber lifts.
inline double h_A(double x) { return x / (1.0 + x); }
inline double h_B(double x) { return 1.0 / (2.0 - x); }

struct SkewPoint {
    double x = 0.0;
    double omega = 0.0;
    double modulus = 0.0;  // log r
};

inline double fiber_mod(double w, double modulus) {
    double v = std::fmod(w, modulus);
    if (v < 0) v += modulus;
    if (v >= modulus) v = 0.0;
    return v;
}

inline SkewPoint make_skew_point(double x, double omega, double r_modulus) {
    if (!(r_modulus > 1.0)) throw std::invalid_argument("SkewPoint: need r > 1");
    double m = std::log(r_modulus);
    return SkewPoint{x, fiber_mod(omega, m), m};
}

inline SkewPoint skew_step(const SkewPoint& p) {
    SkewPoint q;
    q.modulus = p.modulus;
    q.x = farey_map(p.x);
    q.omega = fiber_mod(p.omega + phi(p.x), p.modulus);
    return q;
}

/// One backward step (x,w) -> h_bar_A(x,w) or h_bar_B(x,w); these are the
/// inverse branches of the skew product, and the steps of the Farey random walk.
inline SkewPoint skew_backstep(const SkewPoint& p, bool branch_B) {
    SkewPoint q;
    q.modulus = p.modulus;
    if (branch_B) {
        q.x = h_B(p.x);
        q.omega = p.omega + std::log(2.0 - p.x);
    } else {
        q.x = h_A(p.x);
        q.omega = p.omega + std::log1p(p.x);
    }
    if (q.omega >= p.modulus) q.omega -= p.modulus;
    if (q.omega >= p.modulus) q.omega = fiber_mod(q.omega, p.modulus);
    return q;
}

struct BranchIndex {
    int i = 1;  // iterates spent in (1/2, 1)
    int j = 0;  // iterates spent in (0, 1/2) before re-entering Y
    int return_time() const { return i + j + 1; }
    friend bool operator==(const BranchIndex& a, const BranchIndex& b) {
        return a.i == b.i && a.j == b.j;
    }
};

/// Integer Moebius matrix [[a,b],[c,d]], acting as x -> (ax+b)/(cx+d).
struct Moebius {
    std::int64_t a = 1, b = 0, c = 0, d = 1;
    double apply(double x) const { return (a * x + b) / (c * x + d); }
    double derivative(double x) const {
        double den = c * x + d;
        return (a * d - b * c) / (den * den);
    }
    Moebius compose(const Moebius& o) const {  // this after o?  (this * o) acts as h_this o h_o
        return Moebius{a * o.a + b * o.c, a * o.b + b * o.d,
                       c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

inline const Moebius kMatA{1, 0, 1, 1};   // h_A(x) = x/(1+x)
inline const Moebius kMatB{0, 1, -1, 2};  // h_B(x) = 1/(2-x)

/// Matrix of the inverse branch of T^r on I_{i,j}: A B^i A^j.
inline Moebius branch_matrix(const BranchIndex& b) {
    if (b.i < 1 || b.j < 0) throw std::invalid_argument("branch_matrix: need i >= 1, j >= 0");
    Moebius m = kMatA;
    for (int k = 0; k < b.i; ++k) m = m.compose(kMatB);
    for (int k = 0; k < b.j; ++k) m = m.compose(kMatA);
    return m;
}

/// x in I_{i,j} with T^{i+j+1}(x) = y.
inline double inverse_branch(const BranchIndex& b, double y) {
    if (!(y > kY_left && y < kY_right))
        throw std::domain_error("inverse_branch: y outside Y = (1/3, 1/2)");
    return branch_matrix(b).apply(y);
}

/// phi_Y(h_{i,j} y) in closed form: the branch is a Moebius map with
/// determinant 1, hence h'(y) = (c y + d)^{-2}, and summing phi along the
/// return orbit gives phi_Y = (1/2) log h'(y) = -log(c y + d).
inline double branch_phi_Y(const Moebius& m, double y) {
    return -std::log(m.c * y + m.d);
}

struct ReturnRecord {
    BranchIndex branch;
    double image = 0.0;       // T_Y x
    int return_time = 0;
    double phi_sum = 0.0;     // phi_Y(x)
    std::vector<double> itinerary;  // x, Tx, ..., T^{r-1} x
};

/// First return of x in Y; records branch combinatorics and phi_Y(x).
inline ReturnRecord return_data(double x, int step_cap = 10000) {
    if (!(x > kY_left && x < kY_right))
        throw std::domain_error("return_data: x outside Y = (1/3, 1/2)");
    ReturnRecord rec;
    rec.itinerary.push_back(x);
    rec.phi_sum = phi(x);
    double cur = farey_map(x);
    int i = 0, j = 0;
    // first step always lands in (1/2, 1)
    while (cur >= 0.5) {
        ++i;
        rec.itinerary.push_back(cur);
        rec.phi_sum += phi(cur);
        cur = farey_map(cur);
        if (i > step_cap) throw std::runtime_error("return_data: step cap hit in (1/2,1); x is numerically on a partition boundary");
    }
    while (!(cur > kY_left && cur < kY_right)) {
        ++j;
        rec.itinerary.push_back(cur);
        rec.phi_sum += phi(cur);
        cur = farey_map(cur);
        if (j > step_cap) throw std::runtime_error("return_data: step cap hit in (0,1/3); x is numerically on a partition boundary");
    }
    rec.branch = BranchIndex{i, j};
    rec.image = cur;
    rec.return_time = i + j + 1;
    if (rec.return_time != static_cast<int>(rec.itinerary.size()))
        throw std::logic_error("return_data: itinerary length mismatch");
    return rec;
}

/// Induced observable over one return:
/// psi_Y(x, w) = sum_{i<r(x)} psi(T^i x, w + sum_{j<i} phi(T^j x)).
template <typename Psi>
double induced_psi(Psi&& psi, double x, double omega, double modulus) {
    ReturnRecord rec = return_data(x);
    double acc = 0.0, w = omega;
    for (int m = 0; m < rec.return_time; ++m) {
        acc += psi(SkewPoint{rec.itinerary[m], fiber_mod(w, modulus), modulus});
        w += phi(rec.itinerary[m]);
    }
    return acc;
}

///// Round-trip check of the branch-word hypothesis h_A o h_B^i o h_A^j:
/// forward-iterating the branch preimage for r steps must return to y and
/// traverse the stated itinerary. Throws on failure.
inline void verify_branch_convention(int r_max = 12, double tol = 1e-12) {
    const double probes[] = {0.34, 0.385, 0.42, 0.46, 0.499};
    for (int r = 2; r <= r_max; ++r) {
        for (int i = 1; i <= r - 1; ++i) {
            BranchIndex b{i, r - 1 - i};
            Moebius m = branch_matrix(b);
            for (double y : probes) {
                double x = m.apply(y);
                ReturnRecord rec = return_data(x);
                if (!(rec.branch == b) || std::abs(rec.image - y) > tol)
                    throw std::logic_error("branch convention violated at (i,j)=(" +
                                           std::to_string(b.i) + "," + std::to_string(b.j) + ")");
            }
        }
    }
}

/// Fixed point of the contraction h_{w_1} o ... o h_{w_k} (a periodic point
/// of T_Y with the given branch itinerary), by iteration to 1e-14.
inline double branch_word_fixed_point(const std::vector<BranchIndex>& word) {
    if (word.empty()) throw std::invalid_argument("branch_word_fixed_point: empty word");
    Moebius m{1, 0, 0, 1};
    for (const auto& b : word) m = m.compose(branch_matrix(b));
    double x = 0.4;
    for (int it = 0; it < 400; ++it) {
        double nx = m.apply(x);
        if (std::abs(nx - x) < 1e-15) return nx;
        x = nx;
    }
    if (std::abs(m.apply(x) - x) > 1e-14)
        throw std::runtime_error("branch_word_fixed_point: iteration did not settle");
    return x;
}

// ---------------------------------------------------------------------------
// Tower model X = {(x, h) | x in Y, h < r(x)} for the induced map (level 1).

struct TowerPoint {
    double base = 0.0;  // x in Y
    int height = 0;     // < return time of base
};

inline TowerPoint tower_step(const TowerPoint& p) {
    ReturnRecord rec = return_data(p.base);
    if (p.height < 0 || p.height >= rec.return_time)
        throw std::domain_error("tower_step: height outside [0, r(x))");
    if (p.height + 1 < rec.return_time) return TowerPoint{p.base, p.height + 1};
    return TowerPoint{rec.image, 0};
}

/// pi(x, h) = T^h x; satisfies pi o U = T o pi.
inline double tower_project(const TowerPoint& p) {
    double x = p.base;
    for (int k = 0; k < p.height; ++k) x = farey_map(x);
    return x;
}

}  // namespace farey
