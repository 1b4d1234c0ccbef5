#include <catch2/catch_amalgamated.hpp>

#include <farey/renewal.hpp>
#include <farey/rng.hpp>

#include <cmath>
#include <complex>

using namespace farey::renewal;
using Complex = std::complex<double>;

namespace {

RenewalSequence scalar_geometric(double p, int j_max) {
    std::vector<Matrix> blocks;
    for (int j = 1; j <= j_max; ++j) {
        Matrix b(1, 1);
        b(0, 0) = p * std::pow(1.0 - p, j - 1);
        blocks.push_back(b);
    }
    return make_renewal_sequence(blocks);
}

RenewalSequence scalar_geometric_twisted(double p, int j_max, double t) {
    std::vector<Matrix> blocks;
    for (int j = 1; j <= j_max; ++j) {
        Matrix b(1, 1);
        b(0, 0) = p * std::pow(1.0 - p, j - 1) * std::exp(Complex(0.0, t * j));
        blocks.push_back(b);
    }
    return make_renewal_sequence(blocks);
}

// Damped family: R_j(t) = p (1-p)^{j-1} (1-t^2)^j, giving the closed form
// T_n(t) = p (1-t^2)^n exactly (every composition of n rescales by (1-t^2)^n).
RenewalSequence scalar_geometric_damped(double p, int j_max, double t) {
    std::vector<Matrix> blocks;
    double f = 1.0 - t * t, scale = 1.0;
    for (int j = 1; j <= j_max; ++j) {
        scale *= f;
        Matrix b(1, 1);
        b(0, 0) = p * std::pow(1.0 - p, j - 1) * scale;
        blocks.push_back(b);
    }
    return make_renewal_sequence(blocks);
}

}  // namespace

TEST_CASE("scalar geometric inter-arrival times renew at constant rate p") {
    for (double p : {0.25, 0.5, 0.8}) {
        auto seq = scalar_geometric(p, 400);
        auto sums = partial_sums(seq, 60);
        for (int n = 1; n <= 60; ++n)
            REQUIRE(std::abs(sums[n](0, 0) - Complex(p, 0.0)) < 1e-12);
        auto data = limit_data(seq);
        REQUIRE(data.mu == Catch::Approx(1.0 / p).margin(1e-9));
        REQUIRE(std::abs(data.P(0, 0) - Complex(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("matrix partial sums match brute-force composition enumeration") {
    farey::SplitMix64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        // Random substochastic-ish 3x3 blocks R_1..R_4 (then padded with zeros).
        std::vector<Matrix> blocks;
        for (int j = 1; j <= 4; ++j) {
            Matrix b(3, 3);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    b(r, c) = Complex(0.2 * rng.next_double(), 0.1 * (rng.next_double() - 0.5));
            blocks.push_back(b);
        }
        auto seq = make_renewal_sequence(blocks);
        auto sums = partial_sums(seq, 6);

        // Brute force: T_n = sum over compositions (j_1,...,j_m) of n, with the
        // product taken in recursion order R_{j_1} R_{j_2} ... R_{j_m}.
        for (int n = 1; n <= 6; ++n) {
            Matrix total = Matrix::Zero(3, 3);
            std::vector<int> comp;
            std::function<void(int, const Matrix&)> rec = [&](int rem, const Matrix& prod) {
                if (rem == 0) {
                    total += prod;
                    return;
                }
                for (int j = 1; j <= std::min(rem, 4); ++j) rec(rem - j, prod * blocks[j - 1]);
            };
            rec(n, Matrix::Identity(3, 3));
            REQUIRE(operator_norm(sums[n] - total) < 1e-12);
        }
    }
}

TEST_CASE("twisted scalar family matches the direct lattice convolution") {
    // With geometric weights twisted by e^{itj}, every renewal path of total
    // length n carries the same phase e^{itn}, so T_n(t) = p e^{itn}.
    for (double t : {0.05, 0.2}) {
        double p = 0.4;
        auto seq = scalar_geometric_twisted(p, 400, t);
        auto sums = partial_sums(seq, 50);
        for (int n = 1; n <= 50; ++n) {
            Complex expected = p * std::exp(Complex(0.0, t * n));
            REQUIRE(std::abs(sums[n](0, 0) - expected) < 1e-10);
        }
    }
}

TEST_CASE("deviation from the renewal limit fits an exact geometric envelope") {
    auto fit = limit_check(scalar_geometric(0.5, 400), 40);
    // T_n = p exactly, so deviations sit at rounding level and the fit reports so.
    REQUIRE((fit.exact || fit.max_residual < 1e-10));
}

TEST_CASE("perturbed family satisfies the quadratic-decay envelope") {
    double p = 0.4;
    auto builder = [p](double t) { return scalar_geometric_damped(p, 400, t); };
    // closed form for the damped family
    auto T = partial_sums(builder(0.1), 30);
    for (int n : {5, 20})
        REQUIRE(std::abs(T[n](0, 0) - Complex(p * std::pow(0.99, n), 0.0)) < 1e-12);
    for (double t : {0.05, 0.2}) {
        auto rep1 = perturbed_limit_check(builder, t, 60);
        auto rep2 = perturbed_limit_check(builder, t, 120);
        REQUIRE(rep1.dominated);
        REQUIRE(rep2.dominated);
        REQUIRE(rep1.max_ratio <= 1.0);
        REQUIRE(rep1.theta_bar == Catch::Approx(rep2.theta_bar).margin(0.1));
    }
}

TEST_CASE("perturbation is Lipschitz in t") {
    double p = 0.4;
    auto builder = [p](double t) { return scalar_geometric_damped(p, 400, t); };
    double lip = lipschitz_certificate(builder, 0.2);
    REQUIRE(std::isfinite(lip));
    REQUIRE(lip > 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
    REQUIRE_THROWS_AS(make_renewal_sequence({}), std::invalid_argument);
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(3, 3);
    REQUIRE_THROWS_AS(make_renewal_sequence({a, b}), std::invalid_argument);
    // A mass-deficient family has no eigenvalue 1.
    std::vector<Matrix> blocks;
    Matrix h(1, 1);
    h(0, 0) = 0.25;
    blocks.push_back(h);
    REQUIRE_THROWS(limit_data(make_renewal_sequence(blocks)));
}
