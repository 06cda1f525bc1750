#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "levydiv/barrier.hpp"
#include "levydiv/model.hpp"
#include "levydiv/quadrature.hpp"
#include "levydiv/scale.hpp"

namespace levydiv {

/*!
 * A candidate function for the integro-differential generator, carried with
 * exact first and second derivatives (never numerical differentiation) and
 * enough structure for the quadrature to split the jump integrals at the
 * right places:
 *
 *  - `kinks`: interior points where g' jumps (e.g. the barrier level);
 *  - `vanishes_below_zero`: value/scale functions are 0 on (-inf, 0), which
 *    lets the downward tail be integrated exactly;
 *  - `growth_rate`: g(x) = O(e^{growth_rate x}) controls the upward cutoff.
 */
struct GeneratorFn {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    std::vector<double> kinks;
    bool vanishes_below_zero = false;
    double growth_rate = 0.0;

    static GeneratorFn from_scale(const ScaleFunction& sf) {
        GeneratorFn g;
        g.value = [sf](double x) { return x < 0.0 ? 0.0 : sf.value(x, 0); };
        g.d1 = [sf](double x) { return x < 0.0 ? 0.0 : sf.value(x, 1); };
        g.d2 = [sf](double x) { return x < 0.0 ? 0.0 : sf.value(x, 2); };
        g.vanishes_below_zero = true;
        g.growth_rate = sf.expansion().rho;
        return g;
    }

    static GeneratorFn from_value(const BarrierValueFunction& v) {
        GeneratorFn g;
        g.value = [v](double x) { return value_at(v, x); };
        g.d1 = [v](double x) { return x < 0.0 ? 0.0 : value_gradient(v, x); };
        g.d2 = [v](double x) { return x < 0.0 ? 0.0 : value_curvature(v, x); };
        g.kinks = {v.barrier()};
        g.vanishes_below_zero = true;
        g.growth_rate = 0.0;  // linear above the barrier
        return g;
    }
};

/// Quadrature configuration for applying the generator.
struct GeneratorQuadrature {
    ModelSpec model;
    double rel_tol = 1e-9;
    double tail_eps = 1e-12;  // jump-tail mass ignored beyond the cutoff

    explicit GeneratorQuadrature(ModelSpec m, double tol = 1e-9, double eps = 1e-12)
        : model(std::move(m)), rel_tol(tol), tail_eps(eps) {}
};

namespace detail {

inline void add_splits(std::vector<double>& pts, double lo, double hi, const std::vector<double>& interior) {
    pts.push_back(lo);
    for (double p : interior)
        if (p > lo && p < hi) pts.push_back(p);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
}

}  // namespace detail

/*!
 * Apply the generator of the uncontrolled surplus to g at x > 0:
 *
 *   Gamma g(x) = sigma^2/2 g''(x) + a g'(x)
 *              + lambda+ Int_0^inf [g(x+y) - g(x)] f+(y) dy
 *              + lambda- Int_0^inf [g(x-y) - g(x)] f-(y) dy.
 *
 * The model folds the small-jump compensator into the drift, so no
 * compensating term appears. Jump integrals use adaptive Gauss-Kronrod on
 * smooth pieces, split at the kinks of g and at y = x where a vanishing g
 * drops to zero; the downward tail beyond y = x is added in closed form.
 */
inline double apply_generator(const GeneratorQuadrature& q, const GeneratorFn& g, double x) {
    if (!(x > 0.0)) detail::fail_domain("apply_generator: x must be > 0");
    const ModelSpec& m = q.model;
    double out = 0.5 * m.sigma() * m.sigma() * g.d2(x) + m.drift() * g.d1(x);
    const double gx = g.value(x);

    if (m.negative_jumps().active()) {
        const auto& d = *m.negative_jumps().density;
        double hi = g.vanishes_below_zero ? x : x + d.tail_quantile(q.tail_eps);
        std::vector<double> pts;
        std::vector<double> interior;
        for (double k : g.kinks) interior.push_back(x - k);
        if (!g.vanishes_below_zero) interior.push_back(x);
        detail::add_splits(pts, 0.0, hi, interior);
        double total = 0.0, err = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            auto r = integrate([&](double y) { return (g.value(x - y) - gx) * d.pdf(y); }, pts[i], pts[i + 1],
                               q.rel_tol);
            total += r.value;
            err += r.error;
            l1 += r.l1_norm;
        }
        if (g.vanishes_below_zero) total -= gx * d.tail(x);  // exact tail: g == 0 past y = x
        require_converged({total, err, l1}, q.rel_tol * 8, "apply_generator (downward integral)");
        out += m.negative_jumps().intensity * total;
    }

    if (m.positive_jumps().active()) {
        const auto& d = *m.positive_jumps().density;
        if (!(g.growth_rate < d.min_rate()))
            detail::fail_domain("apply_generator: upward integral diverges (growth rate >= smallest rate)");
        // Cutoff where the integrand tail e^{growth y} * density-tail drops
        // below tail_eps.
        double decay = d.min_rate() - g.growth_rate;
        double hi = std::log(1.0 / q.tail_eps) / decay + 5.0 / decay;
        std::vector<double> pts;
        std::vector<double> interior;
        for (double k : g.kinks) interior.push_back(k - x);
        detail::add_splits(pts, 0.0, hi, interior);
        double total = 0.0, err = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            auto r = integrate([&](double y) { return (g.value(x + y) - gx) * d.pdf(y); }, pts[i], pts[i + 1],
                               q.rel_tol);
            total += r.value;
            err += r.error;
            l1 += r.l1_norm;
        }
        require_converged({total, err, l1}, q.rel_tol * 8, "apply_generator (upward integral)");
        out += m.positive_jumps().intensity * total;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    std::string grid;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<double> residuals;
};

struct DiagnosticsReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(CheckResult c) { checks.push_back(std::move(c)); }
};

inline std::vector<double> make_grid(double lo, double hi, int n) {
    if (n < 2) detail::fail_invalid("make_grid: need at least 2 points");
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * i / (n - 1);
    return xs;
}

namespace detail {

inline std::string grid_desc(const std::vector<double>& xs) {
    std::ostringstream os;
    os << xs.size() << " points on [" << xs.front() << ", " << xs.back() << "]";
    return os.str();
}

}  // namespace detail

/*!
 * Verify the optimality conditions of the barrier value function on a grid
 * (points within 1e-6 of the barrier are skipped; V is not twice
 * differentiable there):
 *
 *   below b:   (Gamma - delta) V(x) <= tol   and   V'(x) >= 1 - tol,
 *   above b:   (Gamma - delta) V(x) <= tol.
 *
 * Without positive jumps the generator is local above x, V coincides with
 * a multiple of h on everything Gamma can reach from below the barrier,
 * and the strict equality (Gamma - delta) V = 0 holds below b; in that
 * case it is checked too. With positive jumps Gamma reaches V's linear
 * branch and only the inequality form holds. Generator residuals are
 * normalised by max(1, delta V(x)).
 */
inline DiagnosticsReport check_hjb(const GeneratorQuadrature& q, const BarrierValueFunction& v,
                                   const std::vector<double>& grid, double tol = 1e-6) {
    const double b = v.barrier();
    const double delta = q.model.discount();
    const bool spectrally_negative = !q.model.positive_jumps().active();
    GeneratorFn g = GeneratorFn::from_value(v);

    CheckResult below{"hjb_inequality_below_barrier", "", 0.0, tol, true, {}};
    CheckResult beloweq{"hjb_equality_below_barrier", "", 0.0, tol, true, {}};
    CheckResult above{"hjb_inequality_above_barrier", "", 0.0, tol, true, {}};
    CheckResult grad{"gradient_floor_below_barrier", "", 0.0, tol, true, {}};
    std::vector<double> xs_below, xs_above;
    for (double x : grid) {
        if (!(x > 0.0) || std::abs(x - b) <= 1e-6) continue;
        double r = (apply_generator(q, g, x) - delta * value_at(v, x)) / std::max(1.0, delta * value_at(v, x));
        if (x < b) {
            below.residuals.push_back(r);
            below.max_residual = std::max(below.max_residual, r);
            if (spectrally_negative) {
                beloweq.residuals.push_back(r);
                beloweq.max_residual = std::max(beloweq.max_residual, std::abs(r));
            }
            xs_below.push_back(x);
            double short_fall = 1.0 - value_gradient(v, x);
            grad.residuals.push_back(short_fall);
            grad.max_residual = std::max(grad.max_residual, short_fall);
        } else {
            above.residuals.push_back(r);
            above.max_residual = std::max(above.max_residual, r);
            xs_above.push_back(x);
        }
    }
    below.pass = below.max_residual <= tol;
    beloweq.pass = beloweq.max_residual <= tol;
    above.pass = above.max_residual <= tol;
    grad.pass = grad.max_residual <= tol;
    below.grid = xs_below.empty() ? "empty" : detail::grid_desc(xs_below);
    beloweq.grid = spectrally_negative ? below.grid : "skipped: positive jumps present";
    grad.grid = below.grid;
    above.grid = xs_above.empty() ? "empty" : detail::grid_desc(xs_above);

    DiagnosticsReport rep;
    rep.add(std::move(below));
    if (spectrally_negative) rep.add(std::move(beloweq));
    rep.add(std::move(above));
    rep.add(std::move(grad));
    return rep;
}

enum class ShapeCheck { Convex, Concave, Decreasing };

inline const char* shape_name(ShapeCheck s) {
    switch (s) {
        case ShapeCheck::Convex: return "convex";
        case ShapeCheck::Concave: return "concave";
        default: return "decreasing";
    }
}

/// Second- or first-difference shape test of sampled values on an
/// increasing grid.
inline CheckResult check_convexity(const std::vector<double>& xs, const std::vector<double>& values,
                                   ShapeCheck mode, double tol = 1e-9) {
    if (xs.size() != values.size() || xs.size() < 3)
        detail::fail_invalid("check_convexity: need an increasing grid of at least 3 points");
    CheckResult c{std::string("shape_") + shape_name(mode), detail::grid_desc(xs), 0.0, tol, true, {}};
    if (mode == ShapeCheck::Decreasing) {
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            double d = values[i + 1] - values[i];
            c.residuals.push_back(d);
            c.max_residual = std::max(c.max_residual, d);
        }
    } else {
        const double sign = (mode == ShapeCheck::Convex) ? -1.0 : 1.0;
        for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
            double dl = (values[i] - values[i - 1]) / (xs[i] - xs[i - 1]);
            double dr = (values[i + 1] - values[i]) / (xs[i + 1] - xs[i]);
            double d2 = dr - dl;  // >= 0 for convex, <= 0 for concave
            c.residuals.push_back(d2);
            c.max_residual = std::max(c.max_residual, sign * d2);
        }
    }
    c.pass = c.max_residual <= tol;
    return c;
}

/// Sign alternation (-1)^k f^(k) >= -tol for sampled derivative rows
/// (row k holds f^(k) on the grid) -- a finite sample of complete
/// monotonicity.
inline CheckResult check_sign_alternation(const std::vector<double>& xs,
                                          const std::vector<std::vector<double>>& deriv_rows,
                                          double tol = 1e-9) {
    CheckResult c{"complete_monotonicity_sample", detail::grid_desc(xs), 0.0, tol, true, {}};
    for (std::size_t k = 0; k < deriv_rows.size(); ++k) {
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        for (double v : deriv_rows[k]) {
            double violation = -sign * v;  // positive when the sign is wrong
            c.residuals.push_back(violation);
            c.max_residual = std::max(c.max_residual, violation);
        }
    }
    c.pass = c.max_residual <= tol;
    return c;
}

/// Log-convexity of a mixed-exponential density via exact derivatives:
/// (log f)'' = (f'' f - f'^2) / f^2 >= 0. Holds for every valid mixture
/// (completely monotone implies log-convex); the check exists to gate
/// other density families.
inline CheckResult check_logconvexity(const MixedExponentialDensity& d, const std::vector<double>& xs,
                                      double tol = 1e-9) {
    CheckResult c{"density_log_convexity", detail::grid_desc(xs), 0.0, tol, true, {}};
    for (double x : xs) {
        double f = 0.0, f1 = 0.0, f2 = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            double t = d.weights()[j] * d.rates()[j] * std::exp(-d.rates()[j] * x);
            f += t;
            f1 -= d.rates()[j] * t;
            f2 += d.rates()[j] * d.rates()[j] * t;
        }
        double r = -(f2 * f - f1 * f1) / (f * f);  // positive when log-concave somewhere
        c.residuals.push_back(r);
        c.max_residual = std::max(c.max_residual, r);
    }
    c.pass = c.max_residual <= tol;
    return c;
}

/// Sampled-values variant for injected (non-mixture) densities: second
/// differences of log f on a uniform grid.
inline CheckResult check_logconvexity(const std::vector<double>& xs, const std::vector<double>& density_values,
                                      double tol = 1e-9) {
    std::vector<double> logs(density_values.size());
    for (std::size_t i = 0; i < density_values.size(); ++i) {
        if (!(density_values[i] > 0.0)) detail::fail_invalid("check_logconvexity: density values must be > 0");
        logs[i] = std::log(density_values[i]);
    }
    CheckResult c = check_convexity(xs, logs, ShapeCheck::Convex, tol);
    c.name = "density_log_convexity_sampled";
    return c;
}

}  // namespace levydiv
