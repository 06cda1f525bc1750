#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levydiv/model.hpp"
#include "levydiv/roots.hpp"

namespace levydiv {

/// Unique rho in (0, theta_sup) with Psi(rho) = delta. Exists because Psi is
/// convex with Psi(0) = 0, Psi'(0+) > 0 and Psi -> +inf at theta_sup.
inline double root_rho(const ModelSpec& m) {
    LundbergReport lr = lundberg_check(m);
    if (!lr.ok()) {
        std::ostringstream os;
        os << "root_rho: Lundberg condition fails (theta_sup = " << lr.theta_sup
           << ", divergence = " << (lr.limit_divergence ? "yes" : "no") << ", mean drift = " << lr.mean_drift
           << "); no root of Psi(theta) = delta is guaranteed";
        throw std::runtime_error(os.str());
    }
    const double delta = m.discount();
    const double theta_sup = m.theta_sup();
    double hi;
    if (std::isfinite(theta_sup)) {
        hi = 0.5 * theta_sup;
        int k = 0;
        while (laplace_exponent(m, hi) <= delta) {
            hi = 0.5 * (hi + theta_sup);
            if (++k > 200) throw std::runtime_error("root_rho: failed to bracket near theta_sup");
        }
    } else {
        hi = 1.0;
        int k = 0;
        while (laplace_exponent(m, hi) <= delta) {
            hi *= 2.0;
            if (++k > 200) throw std::runtime_error("root_rho: failed to bracket; exponent does not reach delta");
        }
    }
    auto f = [&](double t) { return laplace_exponent(m, t) - delta; };
    auto df = [&](double t) { return laplace_exponent_deriv(m, t); };
    RootResult r = newton_bisect(f, df, 0.0, hi);
    // Newton polish; Psi' >= Psi'(0+) > 0 on (0, theta_sup), so steps are safe.
    double x = r.x;
    for (int i = 0; i < 4; ++i) {
        double step = (laplace_exponent(m, x) - delta) / laplace_exponent_deriv(m, x);
        double xn = x - step;
        if (xn <= 0.0 || xn >= theta_sup) break;
        x = xn;
    }
    if (std::abs(laplace_exponent(m, x) - delta) > 1e-12 * std::max(1.0, delta))
        throw std::runtime_error("root_rho: residual above tolerance after refinement");
    return x;
}

/*!
 * Exponential expansion of the ruin probability of the Esscher-tilted
 * process: psi~(x) = sum_j A_j exp(-R_j x), where -R_j are the negative
 * roots of kappa(eta) = Psi(eta + rho) - delta = 0.
 *
 * The tilt shifts the negative-jump rates to a_j + rho ("tilted ladder").
 * The roots interlace strictly with that ladder,
 *
 *     0 < R_1 < a_1 + rho < R_2 < ... < a_n + rho (< R_{n+1}),
 *
 * and the number of roots is n+1 when the tilted process can creep
 * downwards (sigma > 0, or negative total drift), n otherwise. The
 * coefficients follow the product formula over the tilted rates and are
 * all positive, which makes psi~ completely monotone.
 */
struct TiltedRuinExpansion {
    double rho = 0.0;
    std::vector<double> roots;         // R_j, strictly increasing
    std::vector<double> coeffs;        // A_j > 0
    std::vector<double> tilted_rates;  // a_j + rho, strictly increasing

    double coeff_sum() const {
        double s = 0.0;
        for (double a : coeffs) s += a;
        return s;
    }
};

inline TiltedRuinExpansion solve_expansion(const ModelSpec& m) {
    TiltedRuinExpansion ex;
    ex.rho = root_rho(m);
    const double rho = ex.rho;
    const double delta = m.discount();

    if (m.negative_jumps().active()) {
        for (double a : m.negative_jumps().density->rates()) ex.tilted_rates.push_back(a + rho);
    }
    const std::vector<double>& lad = ex.tilted_rates;
    const std::size_t n = lad.size();

    // kappa(-R) through the rational continuation of Psi; poles at R = a_j + rho.
    auto g = [&](double r) { return laplace_exponent_rational(m, rho - r) - delta; };
    auto dg = [&](double r) { return -laplace_exponent_rational_deriv(m, rho - r); };

    // Whether the root beyond the last pole exists: for R -> inf the
    // rational exponent behaves like sigma^2 R^2 / 2 - a R - const.
    const bool has_extra_root = m.sigma() > 0.0 || m.drift() < 0.0;

    auto shrink_left = [&](double left, double width, const char* where) {
        // first point right of `left` where g < 0 (g -> -inf at a pole from
        // the right; in the first bracket g(0) = 0 with negative slope)
        double t = 0.5 * width;
        for (int k = 0; k < 2000; ++k) {
            if (g(left + t) < 0.0) return left + t;
            t *= 0.5;
        }
        throw std::runtime_error(std::string("solve_expansion: no negative value of kappa found ") + where);
    };
    auto shrink_right = [&](double right, double width, const char* where) {
        double t = 0.5 * width;
        for (int k = 0; k < 2000; ++k) {
            if (g(right - t) > 0.0) return right - t;
            t *= 0.5;
        }
        throw std::runtime_error(std::string("solve_expansion: no positive value of kappa found ") + where);
    };

    std::vector<double> roots;
    for (std::size_t j = 0; j + 1 <= n; ++j) {
        double left = (j == 0) ? 0.0 : lad[j - 1];
        double width = lad[j] - left;
        double lo = shrink_left(left, width, "left of a pole");
        double hi = shrink_right(lad[j], width, "right of a pole");
        if (lo >= hi)
            throw std::runtime_error("solve_expansion: bracket collapsed; roots may not be simple");
        roots.push_back(newton_bisect(g, dg, lo, hi).x);
    }
    if (has_extra_root) {
        double left = n > 0 ? lad.back() : 0.0;
        double width = std::max(1.0, left);
        double lo = (n > 0) ? shrink_left(left, width, "after the last pole")
                            : shrink_left(0.0, 1.0, "near zero");
        double hi = expand_bracket_right(g, lo, 2.0 * std::max(left, 1.0) + 1.0, 60);
        roots.push_back(newton_bisect(g, dg, lo, hi).x);
    }
    ex.roots = std::move(roots);

    // Product-formula coefficients over the tilted ladder.
    const std::size_t mroots = ex.roots.size();
    for (std::size_t j = 0; j < mroots; ++j) {
        double rj = ex.roots[j];
        double num = 1.0;
        for (double a : lad) num *= 1.0 - rj / a;
        double den = 1.0;
        for (std::size_t k = 0; k < mroots; ++k)
            if (k != j) den *= 1.0 - rj / ex.roots[k];
        ex.coeffs.push_back(num / den);
    }

    // Validate the expansion invariants.
    for (std::size_t j = 0; j < mroots; ++j) {
        double rj = ex.roots[j];
        double lo_bound = (j == 0) ? 0.0 : lad[j - 1];
        double hi_bound = (j < n) ? lad[j] : kInf;
        if (!(rj > lo_bound && rj < hi_bound))
            throw std::runtime_error("solve_expansion: interlacing with the tilted ladder violated at root " +
                                     std::to_string(j + 1));
        if (j > 0 && !(rj > ex.roots[j - 1] * (1.0 + 1e-12)))
            throw std::runtime_error("solve_expansion: repeated root detected at index " + std::to_string(j + 1));
        if (!(ex.coeffs[j] > 0.0))
            throw std::runtime_error("solve_expansion: coefficient A_" + std::to_string(j + 1) +
                                     " is not positive");
        double resid = laplace_exponent_rational(m, rho - rj) - delta;
        double scale = 1.0 + std::abs(laplace_exponent_rational_deriv(m, rho - rj));
        if (std::abs(resid) > 1e-10 * scale)
            throw std::runtime_error("solve_expansion: root residual above tolerance at index " +
                                     std::to_string(j + 1));
    }
    if (ex.coeff_sum() > 1.0 + 1e-9)
        throw std::runtime_error("solve_expansion: coefficient sum exceeds 1");
    return ex;
}

/// psi~(x) = sum_j A_j exp(-R_j x) for x >= 0.
inline double ruin_probability_tilted(const TiltedRuinExpansion& ex, double x) {
    if (x < 0.0) detail::fail_domain("ruin_probability_tilted: x must be >= 0");
    double v = 0.0;
    for (std::size_t j = 0; j < ex.roots.size(); ++j) v += ex.coeffs[j] * std::exp(-ex.roots[j] * x);
    return v;
}

/// Exact k-th derivative of psi~: sum_j A_j (-R_j)^k exp(-R_j x).
inline double ruin_probability_tilted_deriv(const TiltedRuinExpansion& ex, double x, int order) {
    if (x < 0.0) detail::fail_domain("ruin_probability_tilted_deriv: x must be >= 0");
    double v = 0.0;
    for (std::size_t j = 0; j < ex.roots.size(); ++j)
        v += ex.coeffs[j] * std::pow(-ex.roots[j], order) * std::exp(-ex.roots[j] * x);
    return v;
}

/*!
 * Generalized scale function h(x) = [1 - psi~(x)] e^{rho x}, an exponential
 * sum evaluated term-wise in closed form together with its derivatives:
 *
 *     h^(k)(x) = sum_i c_i mu_i^k e^{mu_i x},
 *
 * with mu_0 = rho, c_0 = 1 and mu_j = rho - R_j, c_j = -A_j. Solves
 * Gamma h = delta h on (0, inf) with h = 0 below 0; h(0) = 1 - sum A_j,
 * which vanishes exactly when ruin of the tilted process from 0 is certain
 * (sigma > 0). Strictly increasing with h -> inf.
 */
class ScaleFunction {
  public:
    ScaleFunction(ModelSpec model, TiltedRuinExpansion expansion)
        : model_(std::move(model)), expansion_(std::move(expansion)) {
        coeff_.push_back(1.0);
        exponent_.push_back(expansion_.rho);
        for (std::size_t j = 0; j < expansion_.roots.size(); ++j) {
            coeff_.push_back(-expansion_.coeffs[j]);
            exponent_.push_back(expansion_.rho - expansion_.roots[j]);
        }
    }

    static ScaleFunction solve(const ModelSpec& m) { return ScaleFunction(m, solve_expansion(m)); }

    const ModelSpec& model() const { return model_; }
    const TiltedRuinExpansion& expansion() const { return expansion_; }

    /// h^(order)(x) for x >= 0 (right-hand derivatives at 0).
    double value(double x, int order = 0) const {
        double v = 0.0;
        for (std::size_t i = 0; i < coeff_.size(); ++i) {
            double t = coeff_[i] * std::exp(exponent_[i] * x);
            for (int k = 0; k < order; ++k) t *= exponent_[i];
            v += t;
        }
        return v;
    }

    double operator()(double x) const { return value(x, 0); }

  private:
    ModelSpec model_;
    TiltedRuinExpansion expansion_;
    std::vector<double> coeff_;
    std::vector<double> exponent_;
};

inline double scale_h(const ScaleFunction& sf, double x, int order = 0) {
    if (x < 0.0) detail::fail_domain("scale_h: x must be >= 0");
    if (order < 0 || order > 2) detail::fail_domain("scale_h: order must be 0, 1 or 2");
    return sf.value(x, order);
}

}  // namespace levydiv
