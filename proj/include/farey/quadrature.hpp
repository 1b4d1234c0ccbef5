#pragma once

// Quadrature against the invariant measure: equal-mass nodes for the
// Minkowski measure restricted to Y = (1/3, 1/2), tensored with a uniform
// fiber grid, refined until the integral is stable.

#include <farey/dynamics.hpp>
#include <farey/minkowski.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace farey {

/// Integral over Y of f against the normalized restricted measure, by
/// equal-mass midpoint cells refined until stable to `tol`.
inline double integrate_mu_Y(const std::function<double(double)>& f,
                             double tol = 1e-10, int max_doublings = 14) {
    double prev = 0.0;
    for (int k = 6; k <= 6 + max_doublings; ++k) {
        MeasureNodeSet nodes = mu_Y_nodes(1 << k);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.nodes.size(); ++i)
            acc += nodes.weights[i] * f(nodes.nodes[i]);
        if (k > 6 && std::abs(acc - prev) < tol) return acc;
        prev = acc;
    }
    return prev;
}

/// Integral of g(x, omega) over Y x [0, modulus) against the product of the
/// normalized restricted measure and normalized Lebesgue on the fiber.
inline double integrate_mu_Y_fiber(const std::function<double(double, double)>& g,
                                   double modulus, double tol = 1e-9,
                                   int max_doublings = 10) {
    if (!(modulus > 0)) throw std::invalid_argument("integrate_mu_Y_fiber: modulus <= 0");
    double prev = 0.0;
    for (int k = 5; k <= 5 + max_doublings; ++k) {
        MeasureNodeSet nodes = mu_Y_nodes(1 << k);
        const int m = 1 << (k - 1);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.nodes.size(); ++i) {
            double inner = 0.0;
            for (int j = 0; j < m; ++j)
                inner += g(nodes.nodes[i], modulus * (j + 0.5) / m);
            acc += nodes.weights[i] * inner / m;
        }
        if (k > 5 && std::abs(acc - prev) < tol) return acc;
        prev = acc;
    }
    return prev;
}

/// Integral of g(x, omega) over [0,1] x [0, modulus) against mu x normalized
/// Lebesgue, where mu is the full Minkowski measure on [0,1].
inline double integrate_mu_fiber(const std::function<double(double, double)>& g,
                                 double modulus, double tol = 1e-10,
                                 int max_doublings = 12) {
    if (!(modulus > 0)) throw std::invalid_argument("integrate_mu_fiber: modulus <= 0");
    double prev = 0.0;
    for (int k = 5; k <= 5 + max_doublings; ++k) {
        MeasureNodeSet nodes = mu_nodes_on(Rational(0, 1), Rational(1, 1), 1 << k);
        const int m = 1 << k;
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.nodes.size(); ++i) {
            double inner = 0.0;
            for (int j = 0; j < m; ++j)
                inner += g(nodes.nodes[i], modulus * (j + 0.5) / m);
            acc += nodes.weights[i] * inner / m;
        }
        if (k > 5 && std::abs(acc - prev) < tol) return acc;
        prev = acc;
    }
    throw std::runtime_error("integrate_mu_fiber: quadrature did not stabilize");
}

}  // namespace farey
