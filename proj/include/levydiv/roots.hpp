#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace levydiv {

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/*!
 * Find the root of f inside a sign-changing bracket [lo, hi] by bisection
 * with safeguarded Newton refinement: Newton steps are taken whenever they
 * stay inside the current bracket, otherwise the method falls back to a
 * bisection step. Deterministic and robust against poles just outside the
 * bracket.
 */
template <class F, class DF>
RootResult newton_bisect(F&& f, DF&& df, double lo, double hi, double xtol = 1e-15) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << "newton_bisect: no sign change on [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
        throw std::runtime_error(os.str());
    }
    double x = 0.5 * (lo + hi);
    double fx = f(x);
    int it = 0;
    for (; it < 200; ++it) {
        if ((fx > 0.0) == (fhi > 0.0)) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        if (hi - lo <= xtol * (1.0 + std::abs(lo) + std::abs(hi))) break;
        double dfx = df(x);
        double xn = (dfx != 0.0) ? x - fx / dfx : lo;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x) break;
        x = xn;
        fx = f(x);
        if (fx == 0.0) break;
    }
    return {x, f(x), it};
}

/// Expand the right endpoint geometrically until f changes sign relative to
/// f(lo). Returns the expanded endpoint; throws after max_doublings.
template <class F>
double expand_bracket_right(F&& f, double lo, double hi0, int max_doublings = 60) {
    double flo = f(lo);
    double hi = hi0;
    for (int k = 0; k < max_doublings; ++k) {
        if ((f(hi) > 0.0) != (flo > 0.0)) return hi;
        hi = 2.0 * hi;
    }
    std::ostringstream os;
    os << "expand_bracket_right: no sign change on [" << lo << ", " << hi << "] after " << max_doublings
       << " doublings";
    throw std::runtime_error(os.str());
}

}  // namespace levydiv
