#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "levydiv/barrier.hpp"
#include "levydiv/scale.hpp"
#include "test_support.hpp"

using namespace levydiv;
using testsupport::model_jump_diffusion;
using testsupport::model_m1;
using testsupport::model_mixture;
using testsupport::random_model;

namespace {

/// Dense-grid argmin oracle for the minimizer of h'.
double grid_argmin_hprime(const ScaleFunction& sf, double hi, int npts = 1000000) {
    double best = sf.value(0.0, 1);
    double arg = 0.0;
    for (int i = 1; i <= npts; ++i) {
        double x = hi * i / npts;
        double v = sf.value(x, 1);
        if (v < best) {
            best = v;
            arg = x;
        }
    }
    return arg;
}

}  // namespace

TEST_CASE("optimal barrier location") {
    SECTION("single-exponential example has a closed form") {
        // h'' = rho^2 e^{rho x} - A (R - rho)^2 e^{(rho-R) x} vanishes at
        // b* = log(A (R-rho)^2 / rho^2) / R for the one-root expansion.
        ScaleFunction sf = ScaleFunction::solve(model_m1());
        double rho = sf.expansion().rho;
        double R = sf.expansion().roots[0];
        double A = sf.expansion().coeffs[0];
        double closed = std::log(A * (R - rho) * (R - rho) / (rho * rho)) / R;

        OptimalBarrier ob = find_bstar(sf);
        CHECK(ob.b_star == Catch::Approx(closed).margin(1e-7));
        CHECK(std::abs(sf.value(ob.b_star, 2)) < 1e-6);  // h''(b*) = 0
        CHECK(ob.b_star == Catch::Approx(grid_argmin_hprime(sf, 50.0)).margin(5e-5));
        CHECK(ob.hprime_min == Catch::Approx(sf.value(ob.b_star, 1)).epsilon(1e-14));
    }
    SECTION("grid oracle agreement on further models") {
        for (const ModelSpec& m : {model_mixture(), model_jump_diffusion()}) {
            ScaleFunction sf = ScaleFunction::solve(m);
            OptimalBarrier ob = find_bstar(sf);
            CHECK(ob.b_star == Catch::Approx(grid_argmin_hprime(sf, 50.0)).margin(5e-5));
            if (ob.b_star > 0.0) CHECK(std::abs(sf.value(ob.b_star, 2)) < 1e-6);
        }
    }
    SECTION("impatient discounting pushes the barrier to zero") {
        ModelSpec m(1.5, 0.0, JumpSide(1.0, MixedExponentialDensity({1.0}, {2.0})), JumpSide::none(), 10.0);
        ScaleFunction sf = ScaleFunction::solve(m);
        OptimalBarrier ob = find_bstar(sf);
        CHECK(ob.b_star == 0.0);
        // h' strictly increasing from 0 here
        CHECK(sf.value(0.0, 1) < sf.value(0.5, 1));
        CHECK(sf.value(0.5, 1) < sf.value(2.0, 1));
    }
    SECTION("minimum over a grid within tolerance") {
        rng::PathRng r(5, 5);
        for (int i = 0; i < 15; ++i) {
            ScaleFunction sf = ScaleFunction::solve(random_model(r));
            OptimalBarrier ob = find_bstar(sf);
            for (int k = 0; k <= 200; ++k) {
                double x = 20.0 * k / 200;
                CHECK(sf.value(ob.b_star, 1) <= sf.value(x, 1) + 1e-9);
            }
        }
    }
}

TEST_CASE("barrier value function") {
    ScaleFunction sf = ScaleFunction::solve(model_m1());
    OptimalBarrier ob = find_bstar(sf);
    BarrierValueFunction v(sf, ob.b_star);

    SECTION("zero below zero") {
        CHECK(value_at(v, -0.5) == 0.0);
        CHECK(value_at(v, -1e-12) == 0.0);
    }
    SECTION("both branches agree at the barrier") {
        double b = ob.b_star;
        CHECK(value_at(v, b) == Catch::Approx(sf.value(b, 0) / sf.value(b, 1)).epsilon(1e-15));
        CHECK(value_at(v, b + 1e-9) - value_at(v, b - 1e-9) < 1e-8);
    }
    SECTION("linear with unit slope above the barrier") {
        CHECK(value_at(v, ob.b_star + 1.0) == value_at(v, ob.b_star) + 1.0);
        CHECK(value_gradient(v, ob.b_star + 0.3) == 1.0);
    }
    SECTION("continuous and non-decreasing") {
        double prev = 0.0;
        for (int k = 0; k <= 400; ++k) {
            double x = 8.0 * k / 400;
            double val = value_at(v, x);
            CHECK(val >= prev);
            prev = val;
        }
    }
    SECTION("gradient floor at the optimal barrier") {
        for (int k = 0; k <= 300; ++k) {
            double u = ob.b_star * k / 300;
            CHECK(value_gradient(v, u) >= 1.0 - 1e-9);
        }
    }
    SECTION("suboptimal barrier violates the gradient floor") {
        BarrierValueFunction bad(sf, ob.b_star + 1.0);
        double at_min = value_gradient(bad, ob.b_star);
        CHECK(at_min == Catch::Approx(sf.value(ob.b_star, 1) / sf.value(ob.b_star + 1.0, 1)));
        CHECK(at_min < 1.0);
    }
    SECTION("constructor guards") {
        CHECK_THROWS_AS(BarrierValueFunction(sf, -0.5), std::invalid_argument);
        CHECK_THROWS_AS(value_gradient(v, -1.0), std::domain_error);
    }
}

TEST_CASE("value dominance of the optimal barrier", "[property]") {
    for (const ModelSpec& m : {model_m1(), model_mixture(), model_jump_diffusion()}) {
        ScaleFunction sf = ScaleFunction::solve(m);
        double b_star = find_bstar(sf).b_star;
        BarrierValueFunction best(sf, b_star);
        for (int bi = 0; bi <= 20; ++bi) {
            double b = 0.05 + 8.0 * bi / 20;
            BarrierValueFunction rival(sf, b);
            for (int k = 0; k <= 100; ++k) {
                double x = 10.0 * k / 100;
                CHECK(value_at(best, x) >= value_at(rival, x) - 1e-9);
            }
        }
    }
}

TEST_CASE("concavity of the optimal value for completely monotone claims") {
    for (const ModelSpec& m : {model_m1(), model_mixture()}) {
        ScaleFunction sf = ScaleFunction::solve(m);
        double b_star = find_bstar(sf).b_star;
        BarrierValueFunction v(sf, b_star);
        int n = 200;
        double prev = value_at(v, 0.0), prev_diff = 0.0;
        bool first = true;
        for (int k = 1; k <= n; ++k) {
            double x = b_star * k / n;
            double val = value_at(v, x);
            double diff = val - prev;
            if (!first) CHECK(diff - prev_diff <= 1e-9);  // second differences <= 0
            prev_diff = diff;
            prev = val;
            first = false;
        }
    }
}

TEST_CASE("gradient dominance over barriers above the optimum") {
    ScaleFunction sf = ScaleFunction::solve(model_mixture());
    double b_star = find_bstar(sf).b_star;
    BarrierValueFunction best(sf, b_star);
    for (double x : {b_star + 0.5, b_star + 1.5, b_star + 3.0}) {
        BarrierValueFunction vx(sf, x);
        for (int k = 0; k <= 120; ++k) {
            double u = x * k / 120;
            CHECK(value_gradient(best, u) >= value_gradient(vx, u) - 1e-9);
        }
    }
}
