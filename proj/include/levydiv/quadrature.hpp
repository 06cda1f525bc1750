#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace levydiv {

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
    double l1_norm = 0.0; // integral of |f|, for relative-error scaling
};

/// Adaptive 15-point Gauss-Kronrod on a finite interval. The integrand must
/// be smooth on (a, b); callers split at kinks and discontinuities.
template <class F>
IntegrationResult integrate(F&& f, double a, double b, double rel_tol = 1e-9) {
    using boost::math::quadrature::gauss_kronrod;
    IntegrationResult r;
    if (a >= b) return r;
    r.value = gauss_kronrod<double, 15>::integrate(f, a, b, 15, rel_tol, &r.error, &r.l1_norm);
    return r;
}

/// Throws when the achieved error exceeds the requested tolerance relative
/// to the accumulated L1 mass.
inline void require_converged(const IntegrationResult& r, double rel_tol, const char* what) {
    double bound = rel_tol * std::max(r.l1_norm, 1.0);
    if (!(r.error <= bound) || !std::isfinite(r.value)) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (achieved error " << r.error << ", required " << bound
           << ")";
        throw std::runtime_error(os.str());
    }
}

}  // namespace levydiv
