#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace levydiv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

[[noreturn]] inline void fail_domain(const std::string& msg) {
    throw std::domain_error(msg);
}

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw std::invalid_argument(msg);
}

}  // namespace detail

/*!
 * Finite mixture of exponential densities on (0,inf):
 *
 *     f(y) = sum_j b_j * a_j * exp(-a_j * y),   b_j >= 0, sum b_j = 1,
 *
 * with rates strictly increasing a_1 < a_2 < ... < a_n. Densities of this
 * family are completely monotone, which is what makes the closed-form
 * ruin expansion and the barrier-optimality results applicable.
 */
class MixedExponentialDensity {
  public:
    MixedExponentialDensity(std::vector<double> weights, std::vector<double> rates)
        : weights_(std::move(weights)), rates_(std::move(rates)) {
        if (weights_.empty() || weights_.size() != rates_.size())
            detail::fail_invalid("mixed-exponential density: need n >= 1 weights and equally many rates");
        double sum = 0.0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            if (!(weights_[j] >= 0.0))
                detail::fail_invalid("mixed-exponential density: weight " + std::to_string(j) + " is negative");
            if (!(rates_[j] > 0.0))
                detail::fail_invalid("mixed-exponential density: rate " + std::to_string(j) + " is not positive");
            if (j > 0 && !(rates_[j] > rates_[j - 1]))
                detail::fail_invalid("mixed-exponential density: rates must be strictly increasing");
            sum += weights_[j];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            detail::fail_invalid("mixed-exponential density: weights sum to " + std::to_string(sum) +
                                 ", expected 1 within 1e-12");
    }

    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& rates() const { return rates_; }

    /// Smallest rate; the density tail decays like exp(-min_rate * y).
    double min_rate() const { return rates_.front(); }

    double pdf(double y) const {
        if (y < 0.0) return 0.0;
        double v = 0.0;
        for (std::size_t j = 0; j < size(); ++j) v += weights_[j] * rates_[j] * std::exp(-rates_[j] * y);
        return v;
    }

    /// P(Y > y) = sum_j b_j exp(-a_j y), exact.
    double tail(double y) const {
        double v = 0.0;
        for (std::size_t j = 0; j < size(); ++j) v += weights_[j] * std::exp(-rates_[j] * y);
        return v;
    }

    double mean() const {
        double v = 0.0;
        for (std::size_t j = 0; j < size(); ++j) v += weights_[j] / rates_[j];
        return v;
    }

    /// Smallest y with tail(y) < eps.
    double tail_quantile(double eps) const {
        double y = std::log(1.0 / eps) / min_rate();
        while (tail(y) >= eps) y *= 1.5;
        return y;
    }

  private:
    std::vector<double> weights_;
    std::vector<double> rates_;
};

/// One side of the jump measure: intensity plus magnitude density.
/// intensity == 0 iff the density is absent.
struct JumpSide {
    double intensity = 0.0;
    std::optional<MixedExponentialDensity> density;

    JumpSide() = default;
    JumpSide(double lambda, MixedExponentialDensity d) : intensity(lambda), density(std::move(d)) {
        if (!(lambda > 0.0)) detail::fail_invalid("jump side: a density requires intensity > 0");
    }
    static JumpSide none() { return JumpSide{}; }

    bool active() const { return intensity > 0.0; }
    double mean_jump() const { return active() ? density->mean() : 0.0; }
};

/*!
 * Two-sided jump-diffusion risk model. The surplus before dividends is
 *
 *     X_t = x + a t + sigma B_t + sum of upward jumps - sum of downward jumps,
 *
 * with compound-Poisson mixed-exponential jumps on each side. Both sides
 * have finite activity and finite mean, so the small-jump compensator is
 * folded into `drift`: `drift` is the TOTAL linear drift (premium rate),
 * not the truncated triplet constant.
 *
 * Immutable after construction; all member evaluations are pure.
 */
class ModelSpec {
  public:
    ModelSpec(double drift, double sigma, JumpSide negative_jumps, JumpSide positive_jumps, double discount)
        : drift_(drift),
          sigma_(sigma),
          neg_(std::move(negative_jumps)),
          pos_(std::move(positive_jumps)),
          discount_(discount) {
        if (!(sigma_ >= 0.0)) detail::fail_invalid("model: sigma must be >= 0");
        if (!(discount_ > 0.0)) detail::fail_invalid("model: discount rate must be > 0");
        if (drift_ == 0.0 && sigma_ == 0.0 && !neg_.active() && !pos_.active())
            detail::fail_invalid("model: degenerate process (no drift, no diffusion, no jumps)");
        if (!std::isfinite(drift_) || !std::isfinite(sigma_))
            detail::fail_invalid("model: drift and sigma must be finite");
    }

    double drift() const { return drift_; }
    double sigma() const { return sigma_; }
    const JumpSide& negative_jumps() const { return neg_; }
    const JumpSide& positive_jumps() const { return pos_; }
    double discount() const { return discount_; }

    /// Upper end of the admissible exponent interval: the smallest
    /// positive-jump rate, or +inf without positive jumps.
    double theta_sup() const { return pos_.active() ? pos_.density->min_rate() : kInf; }

    /// Lower end: -alpha_1 of the negative side, or -inf without negative jumps.
    double theta_inf() const { return neg_.active() ? -neg_.density->min_rate() : -kInf; }

    double total_jump_intensity() const { return neg_.intensity + pos_.intensity; }

  private:
    double drift_;
    double sigma_;
    JumpSide neg_;
    JumpSide pos_;
    double discount_;
};

/*!
 * Laplace exponent Psi(theta) = (1/t) log E exp(theta X_t):
 *
 *   Psi(theta) = a theta + sigma^2 theta^2 / 2
 *              + lambda+ * sum_j b_j theta / (a_j - theta)
 *              - lambda- * sum_j b_j theta / (a_j + theta),
 *
 * written so that Psi(0) == 0 holds exactly in floating point. Finite for
 * theta in (theta_inf, theta_sup), open at both ends.
 */
inline double laplace_exponent(const ModelSpec& m, double theta) {
    if (!(theta < m.theta_sup())) {
        std::ostringstream os;
        os << "laplace_exponent: theta = " << theta << " violates theta < " << m.theta_sup()
           << " (smallest positive-jump rate)";
        detail::fail_domain(os.str());
    }
    if (!(theta > m.theta_inf())) {
        std::ostringstream os;
        os << "laplace_exponent: theta = " << theta << " violates theta > " << m.theta_inf()
           << " (negative of the smallest negative-jump rate)";
        detail::fail_domain(os.str());
    }
    double v = m.drift() * theta + 0.5 * m.sigma() * m.sigma() * theta * theta;
    if (m.positive_jumps().active()) {
        const auto& d = *m.positive_jumps().density;
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) s += d.weights()[j] * theta / (d.rates()[j] - theta);
        v += m.positive_jumps().intensity * s;
    }
    if (m.negative_jumps().active()) {
        const auto& d = *m.negative_jumps().density;
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) s += d.weights()[j] * theta / (d.rates()[j] + theta);
        v -= m.negative_jumps().intensity * s;
    }
    return v;
}

/// First derivative of the Laplace exponent on the admissible interval.
inline double laplace_exponent_deriv(const ModelSpec& m, double theta) {
    double v = m.drift() + m.sigma() * m.sigma() * theta;
    if (m.positive_jumps().active()) {
        const auto& d = *m.positive_jumps().density;
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            double den = d.rates()[j] - theta;
            s += d.weights()[j] * d.rates()[j] / (den * den);
        }
        v += m.positive_jumps().intensity * s;
    }
    if (m.negative_jumps().active()) {
        const auto& d = *m.negative_jumps().density;
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            double den = d.rates()[j] + theta;
            s += d.weights()[j] * d.rates()[j] / (den * den);
        }
        v -= m.negative_jumps().intensity * s;
    }
    return v;
}

/// Mean drift per unit time, Psi'(0+) = a + lambda+ E[J+] - lambda- E[J-].
inline double mean_drift(const ModelSpec& m) {
    return m.drift() + m.positive_jumps().intensity * m.positive_jumps().mean_jump() -
           m.negative_jumps().intensity * m.negative_jumps().mean_jump();
}

/// Analytic continuation of the Laplace exponent as a rational function,
/// defined for every theta that is not a pole. Coincides with
/// laplace_exponent on the admissible interval; used by the root solver
/// to locate roots beyond the negative-side poles.
inline double laplace_exponent_rational(const ModelSpec& m, double theta) {
    double v = m.drift() * theta + 0.5 * m.sigma() * m.sigma() * theta * theta;
    if (m.positive_jumps().active()) {
        const auto& d = *m.positive_jumps().density;
        for (std::size_t j = 0; j < d.size(); ++j)
            v += m.positive_jumps().intensity * d.weights()[j] * theta / (d.rates()[j] - theta);
    }
    if (m.negative_jumps().active()) {
        const auto& d = *m.negative_jumps().density;
        for (std::size_t j = 0; j < d.size(); ++j)
            v -= m.negative_jumps().intensity * d.weights()[j] * theta / (d.rates()[j] + theta);
    }
    return v;
}

inline double laplace_exponent_rational_deriv(const ModelSpec& m, double theta) {
    double v = m.drift() + m.sigma() * m.sigma() * theta;
    if (m.positive_jumps().active()) {
        const auto& d = *m.positive_jumps().density;
        for (std::size_t j = 0; j < d.size(); ++j) {
            double den = d.rates()[j] - theta;
            v += m.positive_jumps().intensity * d.weights()[j] * d.rates()[j] / (den * den);
        }
    }
    if (m.negative_jumps().active()) {
        const auto& d = *m.negative_jumps().density;
        for (std::size_t j = 0; j < d.size(); ++j) {
            double den = d.rates()[j] + theta;
            v -= m.negative_jumps().intensity * d.weights()[j] * d.rates()[j] / (den * den);
        }
    }
    return v;
}

/// Result of checking the standing assumptions: Theta > 0 with
/// Psi(theta) -> +inf as theta -> Theta, and positive mean drift.
struct LundbergReport {
    double theta_sup = kInf;       // Theta
    bool limit_divergence = false; // lim Psi = +inf at Theta
    bool drift_positive = false;   // Psi'(0+) > 0
    double mean_drift = 0.0;

    bool ok() const { return theta_sup > 0.0 && limit_divergence && drift_positive; }
};

inline LundbergReport lundberg_check(const ModelSpec& m) {
    LundbergReport r;
    r.theta_sup = m.theta_sup();
    // With positive jumps the exponent has a pole at Theta, so divergence is
    // automatic; with Theta = +inf it needs a Gaussian part or positive drift.
    r.limit_divergence = m.positive_jumps().active() ? true : (m.sigma() > 0.0 || m.drift() > 0.0);
    r.mean_drift = mean_drift(m);
    r.drift_positive = r.mean_drift > 0.0;
    return r;
}

/// kappa(eta) = Psi(eta + rho) - delta, the Laplace exponent of the
/// Esscher-tilted process when Psi(rho) = delta.
inline double tilted_exponent(const ModelSpec& m, double rho, double eta) {
    return laplace_exponent(m, eta + rho) - m.discount();
}

/*!
 * Esscher tilt of the model at exponent rho in (0, theta_sup): the measure
 * change dP~/dP|_t = exp(rho X_t - Psi(rho) t). In closed form the tilted
 * process is again of the same family:
 *
 *   drift   a + sigma^2 rho,
 *   rates   a_j + rho (negative side), a_j - rho (positive side),
 *   weights reweighted by b_j a_j / (a_j +- rho).
 *
 * The discount of the returned model is kept equal to the original one.
 */
inline ModelSpec esscher_tilt(const ModelSpec& m, double rho) {
    if (!(rho > 0.0 && rho < m.theta_sup()))
        detail::fail_domain("esscher_tilt: rho must lie in (0, theta_sup)");
    auto tilt_side = [](const JumpSide& side, double shift) -> JumpSide {
        if (!side.active()) return JumpSide::none();
        const auto& d = *side.density;
        std::vector<double> w(d.size()), rates(d.size());
        double total = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            rates[j] = d.rates()[j] + shift;
            w[j] = d.weights()[j] * d.rates()[j] / rates[j];
            total += w[j];
        }
        for (auto& x : w) x /= total;
        // absorb rounding so the stored weights sum to exactly 1
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < w.size(); ++j) s += w[j];
        w.back() = 1.0 - s;
        return JumpSide(side.intensity * total, MixedExponentialDensity(std::move(w), std::move(rates)));
    };
    return ModelSpec(m.drift() + m.sigma() * m.sigma() * rho, m.sigma(), tilt_side(m.negative_jumps(), rho),
                     tilt_side(m.positive_jumps(), -rho), m.discount());
}

}  // namespace levydiv
