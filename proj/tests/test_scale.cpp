#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "levydiv/barrier.hpp"
#include "levydiv/model.hpp"
#include "levydiv/scale.hpp"
#include "test_support.hpp"

using namespace levydiv;
using testsupport::model_jump_diffusion;
using testsupport::model_m1;
using testsupport::model_mixture;
using testsupport::random_model;

namespace {

/// Independent root oracle: dense sign scan of kappa(-R) between
/// consecutive poles of the tilted ladder, refined by plain bisection.
/// Shares nothing with solve_expansion's bracketing or Newton steps.
std::vector<double> sign_scan_roots(const ModelSpec& m, double rho, double scan_to = 80.0) {
    auto g = [&](double r) { return laplace_exponent_rational(m, rho - r) - m.discount(); };
    std::vector<double> edges{0.0};
    if (m.negative_jumps().active())
        for (double a : m.negative_jumps().density->rates()) edges.push_back(a + rho);
    edges.push_back(scan_to);

    std::vector<double> roots;
    for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg) {
        const int fine = 40000;
        double lo = edges[seg], hi = edges[seg + 1];
        double pad = (hi - lo) * 1e-7;
        double prev_x = lo + pad;
        double prev_f = g(prev_x);
        for (int i = 1; i <= fine; ++i) {
            double x = lo + pad + (hi - lo - 2 * pad) * i / fine;
            double f = g(x);
            if ((prev_f < 0.0 && f > 0.0) || (prev_f > 0.0 && f < 0.0)) {
                double a = prev_x, b = x;
                for (int k = 0; k < 200; ++k) {
                    double mid = 0.5 * (a + b);
                    ((g(mid) > 0.0) == (f > 0.0) ? b : a) = mid;
                }
                double r = 0.5 * (a + b);
                if (r > 1e-12) roots.push_back(r);
            }
            prev_x = x;
            prev_f = f;
        }
    }
    return roots;
}

}  // namespace

TEST_CASE("lundberg root") {
    SECTION("pure drift") {
        ModelSpec m(1.0, 0.0, JumpSide::none(), JumpSide::none(), 0.1);
        CHECK(root_rho(m) == Catch::Approx(0.1).epsilon(1e-13));
    }
    SECTION("brownian motion with drift solves the quadratic") {
        ModelSpec m(0.5, 1.0, JumpSide::none(), JumpSide::none(), 0.1);
        double expected = -0.5 + std::sqrt(0.25 + 0.2);  // a rho + rho^2/2 = delta
        CHECK(root_rho(m) == Catch::Approx(expected).epsilon(1e-13));
        CHECK(expected == Catch::Approx(0.17082).epsilon(1e-4));
    }
    SECTION("single-exponential example solves its quadratic") {
        // Psi(t) = 1.5 t - t/(2+t) = 0.1  <=>  1.5 t^2 + 1.9 t - 0.2 = 0
        double expected = (-1.9 + std::sqrt(1.9 * 1.9 + 4.0 * 1.5 * 0.2)) / 3.0;
        CHECK(root_rho(model_m1()) == Catch::Approx(expected).epsilon(1e-14));
        CHECK(expected == Catch::Approx(0.09772).epsilon(1e-4));
    }
    SECTION("residual tolerance on random models") {
        rng::PathRng r(11, 4);
        for (int i = 0; i < 100; ++i) {
            ModelSpec m = random_model(r);
            double rho = root_rho(m);
            CHECK(rho > 0.0);
            CHECK(rho < m.theta_sup());
            CHECK(std::abs(laplace_exponent(m, rho) - m.discount()) <= 1e-12 * std::max(1.0, m.discount()));
        }
    }
    SECTION("fails with a diagnostic when the drift condition is violated") {
        ModelSpec m(0.0, 1.0, JumpSide::none(), JumpSide::none(), 0.1);
        CHECK_THROWS_WITH(root_rho(m), Catch::Matchers::ContainsSubstring("Lundberg"));
    }
}

TEST_CASE("ruin expansion of the single-exponential example") {
    ModelSpec m = model_m1();
    TiltedRuinExpansion ex = solve_expansion(m);
    double rho = ex.rho;

    // sigma = 0 with positive drift: exactly n = 1 root, not n+1.
    REQUIRE(ex.roots.size() == 1);
    // Both roots of 1.5 t^2 + 1.9 t - 0.2 = 0: rho and theta2; R = rho - theta2.
    double theta2 = (-1.9 - std::sqrt(1.9 * 1.9 + 4.0 * 1.5 * 0.2)) / 3.0;
    CHECK(ex.roots[0] == Catch::Approx(rho - theta2).epsilon(1e-12));

    // Classical Cramer-Lundberg coefficient for exponential claims applied
    // to the tilted model: A = lambda~ / (a alpha~) with
    // lambda~ = lambda alpha/(alpha+rho) and alpha~ = alpha + rho.
    double alpha_t = 2.0 + rho;
    double a_classical = (1.0 * 2.0 / alpha_t) / (1.5 * alpha_t);
    REQUIRE(ex.coeffs.size() == 1);
    CHECK(ex.coeffs[0] == Catch::Approx(a_classical).epsilon(1e-12));
    CHECK(ex.coeff_sum() < 1.0);  // bounded variation: ruin from 0 not certain
}

TEST_CASE("ruin expansion of the two-term mixture") {
    ModelSpec m = model_mixture();
    TiltedRuinExpansion ex = solve_expansion(m);

    REQUIRE(ex.roots.size() == 2);  // sigma = 0: n roots
    auto oracle = sign_scan_roots(m, ex.rho);
    REQUIRE(oracle.size() == 2);
    CHECK(ex.roots[0] == Catch::Approx(oracle[0]).margin(1e-9));
    CHECK(ex.roots[1] == Catch::Approx(oracle[1]).margin(1e-9));

    // interlacing with the tilted ladder (and with the raw rates here)
    CHECK(ex.roots[0] > 0.0);
    CHECK(ex.roots[0] < 1.0);
    CHECK(ex.roots[1] > 1.0 + ex.rho);
    CHECK(ex.roots[1] < 3.0);
    CHECK(ex.coeffs[0] > 0.0);
    CHECK(ex.coeffs[1] > 0.0);
    CHECK(ex.coeff_sum() <= 1.0);
}

TEST_CASE("ruin expansion of the two-sided jump diffusion") {
    ModelSpec m = model_jump_diffusion();
    TiltedRuinExpansion ex = solve_expansion(m);

    REQUIRE(ex.roots.size() == 3);  // sigma > 0: n + 1 roots
    auto oracle = sign_scan_roots(m, ex.rho);
    REQUIRE(oracle.size() == 3);
    for (int j = 0; j < 3; ++j) CHECK(ex.roots[j] == Catch::Approx(oracle[j]).margin(1e-9));
    CHECK(ex.coeff_sum() == Catch::Approx(1.0).margin(1e-10));  // ruin from 0 certain
}

TEST_CASE("limiting coefficient: A_1 -> 1 as R_1 -> 0") {
    // Near-critical drift with a small discount pushes R_1 toward 0; the
    // product formula then gives A_1 = 1 - R_1/alpha~ -> 1.
    auto claims = MixedExponentialDensity({1.0}, {2.0});
    double a1_prev = 0.0;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        ModelSpec m(0.52, 0.0, JumpSide(1.0, claims), JumpSide::none(), delta);
        TiltedRuinExpansion ex = solve_expansion(m);
        REQUIRE(ex.roots.size() == 1);
        CHECK(ex.coeffs[0] == Catch::Approx(1.0 - ex.roots[0] / ex.tilted_rates[0]).epsilon(1e-12));
        CHECK(ex.coeffs[0] > a1_prev);
        a1_prev = ex.coeffs[0];
    }
    CHECK(a1_prev > 0.95);
}

TEST_CASE("interlacing and positivity on random models", "[property]") {
    testsupport::RandomModelOptions with_sigma;
    with_sigma.force_sigma = true;
    rng::PathRng r(314, 15);
    for (int i = 0; i < 200; ++i) {
        ModelSpec m = random_model(r, with_sigma);
        TiltedRuinExpansion ex = solve_expansion(m);
        const std::size_t n = ex.tilted_rates.size();
        REQUIRE(ex.roots.size() == n + 1);
        for (std::size_t j = 0; j < ex.roots.size(); ++j) {
            double lo = (j == 0) ? 0.0 : ex.tilted_rates[j - 1];
            double hi = (j < n) ? ex.tilted_rates[j] : kInf;
            CHECK(ex.roots[j] > lo);
            CHECK(ex.roots[j] < hi);
            CHECK(ex.coeffs[j] > 0.0);
            double resid = laplace_exponent_rational(m, ex.rho - ex.roots[j]) - m.discount();
            double scale = 1.0 + std::abs(laplace_exponent_rational_deriv(m, ex.rho - ex.roots[j]));
            CHECK(std::abs(resid) <= 1e-10 * scale);
        }
        CHECK(ex.coeff_sum() == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("tilted ruin probability") {
    ModelSpec m = model_m1();
    TiltedRuinExpansion ex = solve_expansion(m);

    CHECK(ruin_probability_tilted(ex, 0.0) == Catch::Approx(ex.coeff_sum()).margin(1e-15));
    CHECK(ruin_probability_tilted(ex, 200.0) < 1e-100);
    double at1 = ruin_probability_tilted(ex, 1.0);
    CHECK(at1 > 0.0);
    CHECK(at1 < ruin_probability_tilted(ex, 0.0));
    CHECK_THROWS_AS(ruin_probability_tilted(ex, -0.1), std::domain_error);

    SECTION("decreasing and convex on a grid") {
        double prev = 2.0, prev_diff = 0.0;
        bool first = true;
        for (int i = 0; i <= 400; ++i) {
            double x = i * 0.05;
            double v = ruin_probability_tilted(ex, x);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev);
            if (!first) CHECK(v - prev >= prev_diff - 1e-12);  // differences increase: convex
            prev_diff = v - prev;
            prev = v;
            first = false;
        }
    }
    SECTION("derivatives alternate in sign") {
        for (double x : {0.0, 0.5, 1.5, 4.0})
            for (int k = 0; k <= 4; ++k) {
                double d = ruin_probability_tilted_deriv(ex, x, k);
                CHECK((k % 2 == 0 ? d : -d) >= 0.0);
            }
    }
}

TEST_CASE("scale function evaluation") {
    SECTION("two independent code paths agree") {
        ScaleFunction sf = ScaleFunction::solve(model_m1());
        for (double x : {0.0, 0.5, 2.0, 5.0}) {
            double via_ruin =
                (1.0 - ruin_probability_tilted(sf.expansion(), x)) * std::exp(sf.expansion().rho * x);
            CHECK(scale_h(sf, x, 0) == Catch::Approx(via_ruin).epsilon(1e-14));
        }
    }
    SECTION("boundary values") {
        ScaleFunction sn = ScaleFunction::solve(model_jump_diffusion());  // sigma > 0
        CHECK(std::abs(scale_h(sn, 0.0, 0)) < 1e-10);                     // h(0) = 1 - sum A_j = 0
        CHECK(scale_h(sn, 0.0, 1) > 0.0);

        ScaleFunction sb = ScaleFunction::solve(model_m1());  // bounded variation
        CHECK(scale_h(sb, 0.0, 0) > 0.0);
        CHECK(scale_h(sb, 0.0, 1) > 0.0);
    }
    SECTION("derivatives match finite differences") {
        rng::PathRng r(8, 2);
        for (int i = 0; i < 10; ++i) {
            ScaleFunction sf = ScaleFunction::solve(random_model(r));
            for (double x : {0.3, 1.0, 2.5, 6.0}) {
                double eps = 1e-5;
                double fd1 = (scale_h(sf, x + eps, 0) - scale_h(sf, x - eps, 0)) / (2 * eps);
                CHECK(scale_h(sf, x, 1) == Catch::Approx(fd1).epsilon(1e-6));
                double fd2 = (scale_h(sf, x + eps, 1) - scale_h(sf, x - eps, 1)) / (2 * eps);
                CHECK(scale_h(sf, x, 2) == Catch::Approx(fd2).epsilon(1e-6));
            }
        }
    }
    SECTION("strictly increasing and divergent") {
        ScaleFunction sf = ScaleFunction::solve(model_mixture());
        double prev = -1.0;
        for (double x = 0.0; x <= 40.0; x += 0.25) {
            double h = scale_h(sf, x, 0);
            CHECK(h > prev);
            prev = h;
        }
        CHECK(scale_h(sf, 300.0, 0) > 1e4);
    }
    SECTION("domain guards") {
        ScaleFunction sf = ScaleFunction::solve(model_m1());
        CHECK_THROWS_AS(scale_h(sf, -1.0, 0), std::domain_error);
        CHECK_THROWS_AS(scale_h(sf, 1.0, 3), std::domain_error);
    }
}

TEST_CASE("derivative of the scale function is convex for mixture claims", "[property]") {
    rng::PathRng r(21, 12);
    for (int i = 0; i < 25; ++i) {
        ScaleFunction sf = ScaleFunction::solve(random_model(r));
        double x0 = 0.0, x1 = 12.0;
        int n = 240;
        double prev_diff = 0.0;
        bool first = true;
        double step = (x1 - x0) / n;
        double prev = sf.value(x0, 1);
        for (int k = 1; k <= n; ++k) {
            double v = sf.value(x0 + k * step, 1);
            double diff = v - prev;
            if (!first) CHECK(diff >= prev_diff - 1e-9);
            prev_diff = diff;
            prev = v;
            first = false;
        }
    }
}

TEST_CASE("spectrally negative reduction to the delta-scale function") {
    SECTION("single-exponential claims: ratio to the Laplace-inversion form is constant") {
        // 1/(Psi(s)-delta) = (alpha+s)/(a (s-rho)(s-theta2)) gives
        // W(x) = [(alpha+rho) e^{rho x} - (alpha+theta2) e^{theta2 x}] / (a (rho-theta2)).
        ModelSpec m = model_m1();
        ScaleFunction sf = ScaleFunction::solve(m);
        double rho = sf.expansion().rho;
        double theta2 = (-1.9 - std::sqrt(1.9 * 1.9 + 4.0 * 1.5 * 0.2)) / 3.0;
        auto w = [&](double x) {
            return ((2.0 + rho) * std::exp(rho * x) - (2.0 + theta2) * std::exp(theta2 * x)) /
                   (1.5 * (rho - theta2));
        };
        double ratio0 = scale_h(sf, 0.7, 0) / w(0.7);
        for (double x : {0.1, 1.0, 3.0, 7.0, 15.0})
            CHECK(scale_h(sf, x, 0) / w(x) == Catch::Approx(ratio0).epsilon(1e-11));
    }
    SECTION("brownian motion: expansion reproduces exp(-2 s x / sigma^2) ruin") {
        double a = 0.5, sigma = 1.2, delta = 0.07;
        ModelSpec m(a, sigma, JumpSide::none(), JumpSide::none(), delta);
        TiltedRuinExpansion ex = solve_expansion(m);
        REQUIRE(ex.roots.size() == 1);
        double s = std::sqrt(a * a + 2.0 * delta * sigma * sigma);
        CHECK(ex.roots[0] == Catch::Approx(2.0 * s / (sigma * sigma)).epsilon(1e-12));
        CHECK(ex.coeffs[0] == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("no downward moves means no ruin and a pure exponential scale") {
    // drift plus positive jumps only: the tilted process never goes below 0,
    // the expansion is empty and h(x) = e^{rho x}
    ModelSpec m(1.0, 0.0, JumpSide::none(), JumpSide(1.0, MixedExponentialDensity({1.0}, {3.0})), 0.1);
    TiltedRuinExpansion ex = solve_expansion(m);
    CHECK(ex.roots.empty());
    CHECK(ex.coeff_sum() == 0.0);
    ScaleFunction sf(m, ex);
    for (double x : {0.0, 1.0, 4.0})
        CHECK(scale_h(sf, x, 0) == Catch::Approx(std::exp(ex.rho * x)).epsilon(1e-15));
    CHECK(find_bstar(sf).b_star == 0.0);  // h' = rho e^{rho x} is increasing
}
