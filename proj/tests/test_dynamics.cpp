#include <catch2/catch_amalgamated.hpp>

#include <farey/dynamics.hpp>
#include <farey/minkowski.hpp>
#include <farey/rng.hpp>

#include <cmath>

using namespace farey;

TEST_CASE("interval map branches and potential") {
    REQUIRE(farey_map(0.25) == Catch::Approx(1.0 / 3.0));
    REQUIRE(farey_map(0.5) == Catch::Approx(0.0));
    REQUIRE(farey_map(2.0 / 3.0) == Catch::Approx(0.5));
    SplitMix64 rng(11);
    for (int i = 0; i < 200; ++i) {
        double x = rng.next_double();
        REQUIRE(phi(x) <= 0.0);
        REQUIRE(farey_map(x) >= 0.0);
        REQUIRE(farey_map(x) <= 1.0);
    }
    // phi records the derivative of the denominator growth: phi = -log T'(x)/2? No:
    // it is log(1-x) on the left branch and log(x) on the right branch.
    REQUIRE(phi(0.25) == Catch::Approx(std::log(0.75)));
    REQUIRE(phi(0.75) == Catch::Approx(std::log(0.75)));
}

TEST_CASE("inverse branches invert the map") {
    SplitMix64 rng(12);
    for (int i = 0; i < 200; ++i) {
        double y = rng.next_double();
        REQUIRE(farey_map(h_A(y)) == Catch::Approx(y).margin(1e-12));
        REQUIRE(farey_map(h_B(y)) == Catch::Approx(y).margin(1e-12));
        REQUIRE(h_A(y) <= 0.5);
        REQUIRE(h_B(y) >= 0.5);
    }
}

TEST_CASE("skew step and backstep are mutually inverse") {
    SplitMix64 rng(13);
    for (int i = 0; i < 200; ++i) {
        SkewPoint p = make_skew_point(rng.next_double(), rng.next_double() * std::log(2.0), 2.0);
        for (bool branch_b : {false, true}) {
            SkewPoint back = skew_backstep(p, branch_b);
            SkewPoint fwd = skew_step(back);
            REQUIRE(fwd.x == Catch::Approx(p.x).margin(1e-10));
            double d = std::fabs(fwd.omega - p.omega);
            d = std::min(d, std::fabs(d - std::log(2.0)));
            REQUIRE(d < 1e-10);
        }
    }
}

TEST_CASE("branch matrices realize the inverse branches of the induced map") {
    REQUIRE_NOTHROW(verify_branch_convention(12, 1e-11));
}

TEST_CASE("first-return data is consistent across routes") {
    SplitMix64 rng(14);
    for (int i = 0; i < 100; ++i) {
        double x = 1.0 / 3.0 + rng.next_double() / 6.0;
        ReturnRecord rec = return_data(x);
        REQUIRE(rec.image > 1.0 / 3.0);
        REQUIRE(rec.image < 0.5);
        REQUIRE(rec.return_time == rec.branch.return_time());
        // Dual route: the cycle potential equals -log(c y + d) of the branch matrix
        // evaluated at the return image.
        Moebius m = branch_matrix(rec.branch);
        REQUIRE(rec.phi_sum == Catch::Approx(branch_phi_Y(m, rec.image)).margin(1e-9));
        // And the inverse branch maps the image back to the start.
        REQUIRE(inverse_branch(rec.branch, rec.image) == Catch::Approx(x).margin(1e-9));
    }
}

TEST_CASE("branch cells carry exact dyadic invariant mass") {
    // The cell with label (i, j) has mass 2^{-i-j-3}, exactly.
    for (int i = 1; i + 1 <= 11; ++i) {
        for (int j = 0; i + j + 1 <= 11; ++j) {
            Moebius m = branch_matrix(BranchIndex{i, j});
            Rational e1(BigInt(m.a) + 3 * BigInt(m.b), BigInt(m.c) + 3 * BigInt(m.d));
            Rational e2(BigInt(m.a) + 2 * BigInt(m.b), BigInt(m.c) + 2 * BigInt(m.d));
            if (e2 < e1) std::swap(e1, e2);
            auto mass = mu_mass(e1, e2);
            REQUIRE(mass == DyadicRational(BigInt(1), i + j + 3));
        }
    }
}

TEST_CASE("short branch words have the expected fixed points") {
    // (1,0): x = (3 - sqrt(5)) / 2, the point with r = 2.
    REQUIRE(branch_word_fixed_point({BranchIndex{1, 0}}) ==
            Catch::Approx(1.5 - std::sqrt(5.0) / 2.0).margin(1e-12));
    // (2,0): x = 1 - sqrt(3)/3, the point with r = 3.
    REQUIRE(branch_word_fixed_point({BranchIndex{2, 0}}) ==
            Catch::Approx(1.0 - std::sqrt(3.0) / 3.0).margin(1e-12));
}

TEST_CASE("tower steps project onto the interval orbit") {
    SplitMix64 rng(15);
    for (int i = 0; i < 50; ++i) {
        double x = 1.0 / 3.0 + rng.next_double() / 6.0;
        ReturnRecord rec = return_data(x);
        TowerPoint t{x, 0};
        double y = x;
        for (int s = 0; s < rec.return_time; ++s) {
            REQUIRE(tower_project(t) == Catch::Approx(y).margin(1e-9));
            t = tower_step(t);
            y = farey_map(y);
        }
        REQUIRE(t.height == 0);
        REQUIRE(t.base == Catch::Approx(rec.image).margin(1e-9));
    }
}

TEST_CASE("induced fiber sums add the potential along the excursion") {
    SplitMix64 rng(16);
    auto psi = [](const SkewPoint& p) { return std::cos(2.0 * std::numbers::pi * p.omega / std::log(2.0)); };
    for (int i = 0; i < 20; ++i) {
        double x = 1.0 / 3.0 + rng.next_double() / 6.0;
        double omega = rng.next_double() * std::log(2.0);
        double via_walk = 0.0;
        SkewPoint p = make_skew_point(x, omega, 2.0);
        ReturnRecord rec = return_data(x);
        for (int s = 0; s < rec.return_time; ++s) {
            via_walk += psi(p);
            p = skew_step(p);
        }
        REQUIRE(induced_psi(psi, x, omega, std::log(2.0)) ==
                Catch::Approx(via_walk).margin(1e-9));
    }
}
