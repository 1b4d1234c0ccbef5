#pragma once

// Chebyshev-Lobatto collocation on [1/3, 1/2] with barycentric interpolation.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace farey {

using Complex = std::complex<double>;

struct ChebGrid {
    double lo = 0.0, hi = 0.0;
    std::vector<double> nodes;    // ascending
    std::vector<double> bary_w;   // barycentric weights

    ChebGrid() = default;
    ChebGrid(double a, double b, int count) : lo(a), hi(b) {
        if (count < 4) throw std::invalid_argument("ChebGrid: need at least 4 nodes");
        nodes.resize(count);
        bary_w.resize(count);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        const double pi = std::acos(-1.0);
        for (int m = 0; m < count; ++m) {
            // reversed so nodes ascend
            nodes[m] = mid - half * std::cos(pi * m / (count - 1));
            double w = (m % 2 == 0) ? 1.0 : -1.0;
            if (m == 0 || m == count - 1) w *= 0.5;
            bary_w[m] = w;
        }
    }

    int size() const { return static_cast<int>(nodes.size()); }

    /// Row of interpolation weights: v(x) = sum_m row[m] * v(nodes[m]).
    std::vector<double> interp_row(double x) const {
        std::vector<double> row(nodes.size(), 0.0);
        double denom = 0.0;
        for (std::size_t m = 0; m < nodes.size(); ++m) {
            double dx = x - nodes[m];
            if (dx == 0.0) { std::fill(row.begin(), row.end(), 0.0); row[m] = 1.0; return row; }
            double t = bary_w[m] / dx;
            row[m] = t;
            denom += t;
        }
        for (auto& t : row) t /= denom;
        return row;
    }
};

/// Complex-valued function on Y held by node values on a shared grid.
struct GridFunction {
    const ChebGrid* grid = nullptr;
    std::vector<Complex> values;

    GridFunction() = default;
    explicit GridFunction(const ChebGrid& g) : grid(&g), values(g.nodes.size(), Complex(0.0)) {}

    template <typename F>
    static GridFunction sample(const ChebGrid& g, F&& f) {
        GridFunction v(g);
        for (int m = 0; m < g.size(); ++m) v.values[m] = f(g.nodes[m]);
        return v;
    }

    Complex eval(double x) const {
        auto row = grid->interp_row(x);
        Complex acc(0.0);
        for (std::size_t m = 0; m < row.size(); ++m) acc += row[m] * values[m];
        return acc;
    }
};

}  // namespace farey
