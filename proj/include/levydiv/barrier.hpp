#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "levydiv/scale.hpp"

namespace levydiv {

/// Largest global minimizer of h' on [0, inf); h' -> inf makes it finite.
struct OptimalBarrier {
    double b_star = 0.0;
    double hprime_min = 0.0;
    std::string search_grid;  // description of the grid and refinement used
};

/*!
 * Locate b* = sup{ b >= 0 : h'(b) <= h'(x) for all x >= 0 }.
 *
 * Since h' = rho h + sum A_j R_j e^{(rho - R_j) x} >= rho h, any x with
 * rho h(x) > 2 h'(0+) has h'(x) above twice a value h' already attains,
 * so the minimizer lies in [0, X_max] with X_max the smallest such x.
 * A 10^4-point grid locates the best cell; golden-section refinement
 * narrows it to 1e-8. Ties across the grid go to the largest minimizer.
 */
inline OptimalBarrier find_bstar(const ScaleFunction& sf) {
    const double rho = sf.expansion().rho;
    const double hp0 = sf.value(0.0, 1);
    double xmax = 1.0;
    int guard = 0;
    while (rho * sf.value(xmax, 0) <= 2.0 * hp0) {
        xmax *= 2.0;
        if (++guard > 200) throw std::runtime_error("find_bstar: failed to bound the search window");
    }

    const int npts = 10000;
    const double dx = xmax / npts;
    double best = hp0;
    int best_i = 0;
    int n_near_min = 0;
    for (int i = 0; i <= npts; ++i) {
        double v = sf.value(i * dx, 1);
        if (v < best - 1e-9) {
            best = v;
            best_i = i;
            n_near_min = 1;
        } else if (v <= best + 1e-9) {
            // tie within tolerance: prefer the larger abscissa (supremum)
            if (v < best) best = v;
            best_i = i;
            ++n_near_min;
        }
    }

    // Golden-section refinement inside the bracketing cells.
    double lo = std::max(0.0, (best_i - 1) * dx);
    double hi = std::min(xmax, (best_i + 1) * dx);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = sf.value(x1, 1);
    double f2 = sf.value(x2, 1);
    while (hi - lo > 1e-8) {
        if (f1 > f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = sf.value(x2, 1);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = sf.value(x1, 1);
        }
    }
    double b = 0.5 * (lo + hi);
    // When the minimum sits in the first cell and the left edge attains it,
    // the minimizer is the boundary point 0 itself.
    if (b <= dx && sf.value(0.0, 1) <= sf.value(b, 1)) b = 0.0;

    OptimalBarrier ob;
    ob.b_star = b;
    ob.hprime_min = sf.value(b, 1);
    std::ostringstream os;
    os << npts << "-point grid on [0, " << xmax << "], golden-section to 1e-8";
    if (n_near_min > 3) os << "; " << n_near_min << " grid points within 1e-9 of the minimum";
    ob.search_grid = os.str();
    return ob;
}

/*!
 * Candidate value function of the barrier strategy at b:
 *
 *     V_b(x) = h(x) / h'(b)          for 0 <= x <= b,
 *     V_b(x) = x - b + h(b) / h'(b)  for x > b,
 *     V_b(x) = 0                     for x < 0.
 */
class BarrierValueFunction {
  public:
    BarrierValueFunction(ScaleFunction sf, double b) : sf_(std::move(sf)), b_(b) {
        if (!(b >= 0.0)) detail::fail_invalid("barrier value function: b must be >= 0");
        h_at_b_ = sf_.value(b, 0);
        hprime_at_b_ = sf_.value(b, 1);
        if (!(hprime_at_b_ > 0.0))
            throw std::runtime_error("barrier value function: h'(b) must be positive");
    }

    const ScaleFunction& scale() const { return sf_; }
    double barrier() const { return b_; }
    double h_at_b() const { return h_at_b_; }
    double hprime_at_b() const { return hprime_at_b_; }

  private:
    ScaleFunction sf_;
    double b_;
    double h_at_b_;
    double hprime_at_b_;
};

inline double value_at(const BarrierValueFunction& v, double x) {
    if (x < 0.0) return 0.0;
    if (x <= v.barrier()) return v.scale().value(x, 0) / v.hprime_at_b();
    return x - v.barrier() + v.h_at_b() / v.hprime_at_b();
}

/// Right-hand derivative of V_b: h'(x)/h'(b) on [0, b], 1 above b.
inline double value_gradient(const BarrierValueFunction& v, double x) {
    if (x < 0.0) detail::fail_domain("value_gradient: x must be >= 0");
    if (x < v.barrier()) return v.scale().value(x, 1) / v.hprime_at_b();
    return 1.0;
}

/// Second derivative away from the kink at b (0 above b).
inline double value_curvature(const BarrierValueFunction& v, double x) {
    if (x < 0.0) detail::fail_domain("value_curvature: x must be >= 0");
    if (x < v.barrier()) return v.scale().value(x, 2) / v.hprime_at_b();
    return 0.0;
}

}  // namespace levydiv
