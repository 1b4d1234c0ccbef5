#pragma once

// Minkowski's ? function, its inverse (Conway box function), and quadrature
// with respect to the singular measure mu = d?(x) and its induced version
// mu_Y on Y = (1/3, 1/2).
//
// ? is computed from the continued-fraction expansion with exact dyadic
// output:  ?([0; a1, a2, ...]) = 2 * sum_i (-1)^{i+1} 2^{-(a1+...+ai)}.
// The Farey correspondence check below is the independent oracle for this
// convention: the j-th element of F_n^* carries cumulative mass j/2^n.

#include "farey/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace farey {

/// Exact dyadic numerator / 2^exponent in [0,1], canonical (numerator odd or zero).
struct DyadicRational {
    BigInt numerator;
    int exponent = 0;

    DyadicRational() : numerator(0) {}
    DyadicRational(BigInt num, int expo) : numerator(std::move(num)), exponent(expo) {
        canonicalize();
    }

    void canonicalize() {
        if (numerator == 0) { exponent = 0; return; }
        while (exponent > 0 && (numerator & 1) == 0) { numerator >>= 1; --exponent; }
    }

    double to_double() const {
        return numerator.convert_to<double>() * std::ldexp(1.0, -exponent);
    }

    /// log2 of the value; safe when the exponent is far beyond double range.
    double log2d() const {
        if (numerator <= 0) throw std::domain_error("DyadicRational::log2d: value <= 0");
        long bits = static_cast<long>(boost::multiprecision::msb(numerator));
        // keep 64 leading bits of the mantissa
        BigInt head = bits > 62 ? BigInt(numerator >> (bits - 62)) : numerator;
        int headshift = bits > 62 ? static_cast<int>(bits - 62) : 0;
        return std::log2(head.convert_to<double>()) + headshift - exponent;
    }
    Rational to_rational() const {
        Rational r;
        r.num = numerator;
        r.den = BigInt(1) << exponent;
        return r;
    }
    std::string str() const { return numerator.str() + "/2^" + std::to_string(exponent); }

    friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
        return a.exponent == b.exponent && a.numerator == b.numerator;
    }
    friend bool operator<(const DyadicRational& a, const DyadicRational& b) {
        if (a.exponent >= b.exponent)
            return a.numerator < (b.numerator << (a.exponent - b.exponent));
        return (a.numerator << (b.exponent - a.exponent)) < b.numerator;
    }
};

inline DyadicRational dyadic_sub(const DyadicRational& a, const DyadicRational& b) {
    int e = std::max(a.exponent, b.exponent);
    BigInt na = a.numerator << (e - a.exponent);
    BigInt nb = b.numerator << (e - b.exponent);
    return DyadicRational(na - nb, e);
}

inline DyadicRational dyadic_add(const DyadicRational& a, const DyadicRational& b) {
    int e = std::max(a.exponent, b.exponent);
    BigInt na = a.numerator << (e - a.exponent);
    BigInt nb = b.numerator << (e - b.exponent);
    return DyadicRational(na + nb, e);
}

/// Continued fraction [0; a1, a2, ...] of p/q in (0,1]; empty for 0.
inline std::vector<long> continued_fraction(const Rational& x) {
    if (x.num < 0 || x.num > x.den) throw std::invalid_argument("continued_fraction: x outside [0,1]");
    std::vector<long> digits;
    BigInt p = x.num, q = x.den;
    while (p != 0) {
        BigInt a = q / p, rem = q % p;
        digits.push_back(a.convert_to<long>());
        q = p;
        p = rem;
    }
    return digits;
}

/// Minkowski ? of a rational, exact.
inline DyadicRational question_mark(const Rational& x) {
    auto digits = continued_fraction(x);
    // sum_i (-1)^{i+1} 2^{1-(a1+...+ai)}, common denominator 2^{s-1}, s = sum a_i.
    long s = 0;
    for (long a : digits) s += a;
    if (digits.empty()) return DyadicRational(BigInt(0), 0);
    BigInt num = 0;
    long partial = 0;
    int sign = 1;
    for (long a : digits) {
        partial += a;
        BigInt term = BigInt(1) << (s - partial);  // 2^{1-partial} / 2^{1-s}
        num += sign > 0 ? term : -term;
        sign = -sign;
    }
    return DyadicRational(num, static_cast<int>(s - 1));
}

/// mu((a,b)) = ?(b) - ?(a), exact.
inline DyadicRational mu_mass(const Rational& a, const Rational& b) {
    if (!(a < b)) throw std::invalid_argument("mu_mass: need a < b");
    return dyadic_sub(question_mark(b), question_mark(a));
}

/// Oracle: ?(j-th element of F_n^*) == j/2^n exactly for all j. Returns the
/// first failing (n, j) on mismatch.
inline std::optional<std::pair<int, std::size_t>> farey_dyadic_correspondence_check(int n) {
    if (n < 0 || n > 16) throw std::invalid_argument("correspondence check: need 0 <= n <= 16");
    FareyLevel f = farey_level(n);
    for (std::size_t j = 1; j < f.fractions.size(); ++j) {
        DyadicRational expect(BigInt(j), n);
        if (!(question_mark(f.fractions[j]) == expect)) return std::make_pair(n, j);
    }
    return std::nullopt;
}

/// ?^{-1}(u) by bisection on the Stern-Brocot tree. The mediant of a tree
/// interval carries the ?-midpoint, so each descent halves the mass gap; we
/// stop once the gap is below tol and return the interval midpoint.
inline double question_mark_inverse(double u, double tol = 1e-14) {
    if (!(tol > 0)) throw std::invalid_argument("question_mark_inverse: tol <= 0");
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    Rational lo(0, 1), hi(1, 1);
    double ulo = 0.0, uhi = 1.0;
    while (uhi - ulo > tol) {
        Rational mid;
        mid.num = lo.num + hi.num;
        mid.den = lo.den + hi.den;
        double um = 0.5 * (ulo + uhi);
        if (u < um) { hi = std::move(mid); uhi = um; }
        else        { lo = std::move(mid); ulo = um; }
    }
    return 0.5 * (lo.to_double() + hi.to_double());
}

/// Fast path used by the samplers: uint64 Stern-Brocot descent. Denominators
/// grow at most like Fibonacci, so ~50 descents stay far below 2^63.
inline double question_mark_inverse_fast(double u, double tol = 1e-14) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    std::uint64_t pl = 0, ql = 1, ph = 1, qh = 1;
    double ulo = 0.0, uhi = 1.0;
    while (uhi - ulo > tol) {
        std::uint64_t pm = pl + ph, qm = ql + qh;
        double um = 0.5 * (ulo + uhi);
        if (u < um) { ph = pm; qh = qm; uhi = um; }
        else        { pl = pm; ql = qm; ulo = um; }
    }
    return 0.5 * (double(pl) / double(ql) + double(ph) / double(qh));
}

/// Equal-mass quadrature cells for a measure restricted to (a,b):
/// nodes x_m = ?^{-1}(?(a) + (m+1/2)/count * mass), uniform weights.
struct MeasureNodeSet {
    double a = 0.0, b = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline MeasureNodeSet mu_nodes_on(const Rational& a, const Rational& b, int count) {
    if (count < 1) throw std::invalid_argument("mu nodes: count < 1");
    double ua = question_mark(a).to_double();
    double ub = question_mark(b).to_double();
    MeasureNodeSet s;
    s.a = a.to_double();
    s.b = b.to_double();
    s.nodes.resize(count);
    s.weights.assign(count, 1.0 / count);
    for (int m = 0; m < count; ++m) {
        double u = ua + (m + 0.5) / count * (ub - ua);
        s.nodes[m] = question_mark_inverse_fast(u);
    }
    return s;
}

/// Quadrature for mu_Y, the normalized restriction of mu to Y = (1/3, 1/2).
inline MeasureNodeSet mu_Y_nodes(int count) {
    return mu_nodes_on(Rational(1, 3), Rational(1, 2), count);
}

}  // namespace farey
