#include <catch2/catch_amalgamated.hpp>

#include <farey/limits.hpp>
#include <farey/transfer.hpp>

#include <cmath>

using namespace farey;

TEST_CASE("untwisted operator at z = 1 fixes the constant function") {
    TransferContext ctx(24, 40);
    GridFunction one(ctx.grid);
    one.values.assign(one.values.size(), Complex(1.0, 0.0));
    GridFunction img = apply_transfer(ctx, 0, Complex(1.0, 0.0), one);
    double tail = branch_tail_mass(40);
    for (const auto& v : img.values) {
        REQUIRE(std::fabs(v.real() - 1.0) <= 2.0 * tail);
        REQUIRE(std::fabs(v.imag()) <= 1e-12);
    }
}

TEST_CASE("generating function of the constant has the closed form (z/2)^2 (1-z/2)^{-2}") {
    TransferContext ctx(24, 60);
    for (double z : {0.5, 0.8, -0.4}) {
        GridFunction one(ctx.grid);
        one.values.assign(one.values.size(), Complex(1.0, 0.0));
        GridFunction img = apply_transfer(ctx, 0, Complex(z, 0.0), one);
        double expected = (z / 2.0) * (z / 2.0) / ((1.0 - z / 2.0) * (1.0 - z / 2.0));
        for (const auto& v : img.values)
            REQUIRE(v.real() == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("twisted spectral radii are contracting and grid-stable") {
    TransferContext c32(32, 40), c64(64, 40);
    double frozen[] = {0.117276, 0.550787, 0.339067, 0.351424, 0.438205};
    for (int k = 1; k <= 5; ++k) {
        double r32 = spectral_radius(build_matrix(c32, k, Complex(1.0, 0.0)));
        double r64 = spectral_radius(build_matrix(c64, k, Complex(1.0, 0.0)));
        REQUIRE(r32 < 1.0);
        REQUIRE(std::fabs(r32 - r64) < 1e-6);
        REQUIRE(r32 == Catch::Approx(frozen[k - 1]).margin(1e-4));
    }
}

TEST_CASE("renewal partial sums of the transfer blocks approach one quarter") {
    TransferContext ctx(24, 40);
    auto ts = t_sequence(ctx, 0, 60);
    Vector ones = Vector::Ones(24);
    Vector v = ts.back() * ones;
    for (int i = 0; i < v.size(); ++i)
        REQUIRE(v(i).real() == Catch::Approx(0.25).margin(1e-3));
}

TEST_CASE("out-of-range generating variable is rejected") {
    TransferContext ctx(16, 20);
    GridFunction one(ctx.grid);
    one.values.assign(one.values.size(), Complex(1.0, 0.0));
    REQUIRE_THROWS(apply_transfer(ctx, 0, Complex(1.5, 0.0), one));
}

TEST_CASE("perturbed operator is continuous at t = 0") {
    TransferContext ctx(16, 15);
    auto psi = limits::fiber_cosine();
    auto track = track_lambda(ctx, psi.eval, {0.0, 0.01, 0.02}, 4);
    // truncation at r_max leaves an O(2^-r_max) defect in the leading eigenvalue
    REQUIRE(std::abs(track[0].lambda - Complex(1.0, 0.0)) < 1e-3);
    REQUIRE(std::abs(track[1].lambda - track[0].lambda) < 1e-3);
    REQUIRE(std::abs(track[2].lambda - track[1].lambda) < 1e-3);
    // The modulus decreases in |t| along the branch.
    REQUIRE(std::abs(track[2].lambda) < std::abs(track[1].lambda));
    REQUIRE(std::abs(track[1].lambda) < std::abs(track[0].lambda));
}

TEST_CASE("iterated-norm decay probe matches the spectral radius at k = 1") {
    TransferContext ctx(64, 40);
    auto probe = dolgopyat_decay_probe(ctx, {1, -1, 2}, 30);
    double rho1 = spectral_radius(build_matrix(ctx, 1, Complex(1.0, 0.0)));
    REQUIRE(probe[0].factor == Catch::Approx(rho1).epsilon(0.05));
    REQUIRE(probe[1].factor == Catch::Approx(rho1).epsilon(0.05));
    for (const auto& e : probe) REQUIRE(e.factor < 0.999);
}

TEST_CASE("fiber coefficient table reconstructs the sampled phase") {
    // The coefficients are a discrete Fourier expansion in omega of the phase
    // e^{i t (induced psi)}; summing the band back must reproduce the samples.
    TransferContext ctx(16, 60);
    auto psi = limits::fiber_cosine();
    const double t = 0.1;
    auto table = fourier_table(ctx, psi.eval, t, 8, 256);
    REQUIRE(table.alias_tail < 1e-6);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int m = 0; m < ctx.grid.size(); ++m) {
        double x = ctx.grid.nodes[m];
        // endpoint nodes sit on a cell boundary, and nodes in cells deeper
        // than the tabulated return-time cap have no exact table entry
        if (x <= 1.0 / 3.0 || x >= 0.5) continue;
        if (return_data(x).return_time > 60) continue;
        for (double frac : {0.0, 0.3, 0.7}) {
            double omega = frac * ctx.modulus;
            Complex direct =
                std::exp(Complex(0.0, t * induced_psi(psi.eval, x, omega, ctx.modulus)));
            Complex synth(0.0);
            for (int d = -8; d <= 8; ++d)
                synth += table.coeff(d).values[static_cast<std::size_t>(m)] *
                         std::exp(Complex(0.0, two_pi * d * omega / ctx.modulus));
            REQUIRE(std::abs(synth - direct) < 1e-6);
        }
    }
}
