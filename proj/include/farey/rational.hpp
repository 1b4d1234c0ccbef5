#pragma once

// Exact Farey / Stern-Brocot constructions on [0,1].
//
// All set construction is integer-exact: adjacency |p q' - p' q| = 1 is an
// integer identity and is never tested in floating point.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace farey {

using BigInt = boost::multiprecision::cpp_int;

/// Reduced fraction num/den with den > 0.
struct Rational {
    BigInt num;
    BigInt den;

    Rational() : num(0), den(1) {}
    Rational(BigInt n, BigInt d) : num(std::move(n)), den(std::move(d)) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        BigInt g = boost::multiprecision::gcd(num < 0 ? BigInt(-num) : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    Rational(long n, long d) : Rational(BigInt(n), BigInt(d)) {}

    double to_double() const {
        return num.convert_to<double>() / den.convert_to<double>();
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) {
        return a.num * b.den <= b.num * a.den;
    }
    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num * b.num, a.den * b.den);
    }
    std::string str() const { return num.str() + "/" + den.str(); }
};

/// |p q' - p' q| == 1.
inline bool adjacent(const Rational& a, const Rational& b) {
    BigInt d = a.num * b.den - b.num * a.den;
    return d == 1 || d == -1;
}

/// Mediant (p+p')/(q+q') of two adjacent fractions; irreducible by adjacency.
inline Rational mediant(const Rational& a, const Rational& b) {
    if (!adjacent(a, b))
        throw std::invalid_argument("mediant: inputs are not adjacent: " + a.str() + ", " + b.str());
    Rational m;
    m.num = a.num + b.num;
    m.den = a.den + b.den;
    return m;  // gcd(p+p', q+q') = 1 for adjacent inputs
}

/// Level-n mediant set F_n: 0/1 ... 1/1, 2^n + 1 fractions, consecutive pairs adjacent.
struct FareyLevel {
    int n = 0;
    std::vector<Rational> fractions;
};

inline FareyLevel next_level(const FareyLevel& f) {
    FareyLevel out;
    out.n = f.n + 1;
    out.fractions.reserve(2 * f.fractions.size() - 1);
    for (std::size_t i = 0; i + 1 < f.fractions.size(); ++i) {
        out.fractions.push_back(f.fractions[i]);
        Rational m;  // skip the gcd pass: adjacency is an invariant of the level
        m.num = f.fractions[i].num + f.fractions[i + 1].num;
        m.den = f.fractions[i].den + f.fractions[i + 1].den;
        out.fractions.push_back(std::move(m));
    }
    out.fractions.push_back(f.fractions.back());
    return out;
}

inline constexpr int kdefault_level_cap = 24;

inline FareyLevel farey_level(int n, int level_cap = kdefault_level_cap) {
    if (n < 0) throw std::invalid_argument("farey_level: n < 0");
    if (n > level_cap)
        throw std::length_error("farey_level: n=" + std::to_string(n) +
                                " exceeds level cap " + std::to_string(level_cap) +
                                " (2^n+1 fractions); raise the cap explicitly if intended");
    FareyLevel f;
    f.n = 0;
    f.fractions = {Rational(0, 1), Rational(1, 1)};
    for (int k = 0; k < n; ++k) f = next_level(f);
    return f;
}

/// F_n^* = F_n minus {0}, as the orbit {M_n...M_1 . 1 | M_i in {A,B}} of the
/// projective actions h_A(x)=x/(1+x), h_B(x)=1/(2-x).
inline std::set<std::pair<BigInt, BigInt>> word_orbit(int n) {
    if (n < 0 || n > 16) throw std::invalid_argument("word_orbit: need 0 <= n <= 16");
    // h_A(p/q) = p/(p+q), h_B(p/q) = q/(2q-p); both preserve irreducibility.
    std::vector<std::pair<BigInt, BigInt>> cur = {{BigInt(1), BigInt(1)}};
    for (int step = 0; step < n; ++step) {
        std::vector<std::pair<BigInt, BigInt>> nxt;
        nxt.reserve(2 * cur.size());
        for (const auto& [p, q] : cur) {
            nxt.emplace_back(p, p + q);
            nxt.emplace_back(q, 2 * q - p);
        }
        cur = std::move(nxt);
    }
    return {cur.begin(), cur.end()};
}

/// F_n^* lifted to the fiber: (p/q, log q mod log r).
struct LiftedFareySet {
    int n = 0;
    double modulus = 0.0;  // log r
    std::vector<std::pair<Rational, double>> points;
};

inline double log_mod(double v, double modulus) {
    double w = std::fmod(v, modulus);
    if (w < 0) w += modulus;
    if (w >= modulus) w = 0.0;
    return w;
}

inline LiftedFareySet lift_level(int n, double r, int level_cap = kdefault_level_cap) {
    if (!(r > 1.0)) throw std::invalid_argument("lift_level: need r > 1");
    LiftedFareySet out;
    out.n = n;
    out.modulus = std::log(r);
    FareyLevel f = farey_level(n, level_cap);
    out.points.reserve(f.fractions.size() - 1);
    for (std::size_t i = 1; i < f.fractions.size(); ++i) {  // skip 0/1
        const Rational& x = f.fractions[i];
        double logq = std::log(x.den.convert_to<double>());
        out.points.emplace_back(x, log_mod(logq, out.modulus));
    }
    return out;
}

}  // namespace farey
