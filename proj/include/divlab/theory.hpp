#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "divlab/errors.hpp"
#include "divlab/population.hpp"
#include "divlab/rational.hpp"

namespace divlab {

enum class TieBreaking { prefer_offspring, uniform_random };

/// Closed-form predictions for the diversity process of a steady-state
/// (mu+1) algorithm with an unbiased mutation operator flipping chi bits in
/// expectation on a flat fitness function. The one-step recursion is
///
///     E(S') = (1 - delta) * S + alpha
///
/// with alpha = 2(mu-1)chi and delta = 2/mu^2 + 4(mu-1)chi/(mu^2 n).
/// Uniform-random tie breaking scales both coefficients by mu/(mu+1), which
/// slows the process but leaves the equilibrium alpha/delta unchanged.
struct TheoryParams {
    std::size_t mu;
    std::size_t n;
    double chi;
    double eps = 1.0;
    TieBreaking tie = TieBreaking::prefer_offspring;

    void validate() const {
        if (mu < 2) throw UsageError("population size must be at least 2");
        if (n < 1) throw UsageError("genome length must be positive");
        if (!(chi > 0) || chi > static_cast<double>(n)) {
            throw UsageError("expected flip count must lie in (0, n]");
        }
        if (!(eps > 0) || eps > 1) throw UsageError("epsilon must lie in (0, 1]");
    }
};

struct DriftCoefficients {
    double alpha;
    double delta;
};

inline DriftCoefficients alpha_delta(const TheoryParams& p) {
    p.validate();
    const double mu = static_cast<double>(p.mu);
    const double n = static_cast<double>(p.n);
    double alpha = 2.0 * (mu - 1.0) * p.chi;
    double delta = 2.0 / (mu * mu) + 4.0 * (mu - 1.0) * p.chi / (mu * mu * n);
    if (p.tie == TieBreaking::uniform_random) {
        const double scale = mu / (mu + 1.0);
        alpha *= scale;
        delta *= scale;
    }
    return {alpha, delta};
}

/// Equilibrium diversity S0 = alpha/delta = (mu-1) mu^2 chi n / (2(mu-1)chi + n).
/// Identical under both tie-breaking modes.
inline double equilibrium(const TheoryParams& p) {
    const auto [alpha, delta] = alpha_delta(p);
    return alpha / delta;
}

/// Exact conditional expectation of the next diversity given the current one.
inline double predicted_drift(const TheoryParams& p, double diversity) {
    const auto [alpha, delta] = alpha_delta(p);
    return (1.0 - delta) * diversity + alpha;
}

struct HittingTimeBounds {
    double down;  ///< bound on E(first time S <= (1+eps) S0), from any start
    double up;    ///< bound on E(first time S >= (1-eps) S0), from any start
};

/// Upper bounds on the expected time to approach the equilibrium from above
/// (down) and from below (up), using X_max = mu^2 n / 2 and the one-step
/// change bound Delta_max = 2(mu-1)n:
///
///     down <= 4/(eps delta) * ln(2 delta X_max / (eps alpha))
///     up   <= 4 Delta_max/(eps alpha) * ln((2 alpha + 2 delta Delta_max)/(eps alpha))
inline HittingTimeBounds hitting_time_bounds(const TheoryParams& p) {
    const auto [alpha, delta] = alpha_delta(p);
    const double x_max = diversity_upper_bound(p.mu, p.n);
    const double delta_max = static_cast<double>(max_step_change(p.mu, p.n));
    const double down_arg = 2.0 * delta * x_max / (p.eps * alpha);
    const double up_arg = (2.0 * alpha + 2.0 * delta * delta_max) / (p.eps * alpha);
    if (!(down_arg > 1.0) || !(up_arg > 1.0)) {
        throw UsageError("degenerate parameters: hitting-time bound logarithms not positive");
    }
    return {4.0 / (p.eps * delta) * std::log(down_arg),
            4.0 * delta_max / (p.eps * alpha) * std::log(up_arg)};
}

/// True iff eps mu^2 chi >= n + 2(mu-1)chi. Then the first boundary crossing
/// cannot skip over the band [1-eps, 1+eps] * S0.
inline bool non_skip_condition(const TheoryParams& p) {
    p.validate();
    const double mu = static_cast<double>(p.mu);
    return p.eps * mu * mu * p.chi >= static_cast<double>(p.n) + 2.0 * (mu - 1.0) * p.chi;
}

namespace exact {

/// Rational counterparts used by the enumeration cross-checks, where
/// equality is exact rather than within floating-point tolerance.

struct DriftCoefficients {
    Rational alpha;
    Rational delta;
};

inline DriftCoefficients alpha_delta(std::size_t mu, std::size_t n, const Rational& chi,
                                     TieBreaking tie = TieBreaking::prefer_offspring) {
    if (mu < 2) throw UsageError("population size must be at least 2");
    Rational alpha = 2 * Rational(mu - 1) * chi;
    Rational delta = Rational(2, mu * mu) + 4 * Rational(mu - 1) * chi / (Rational(mu * mu) * n);
    if (tie == TieBreaking::uniform_random) {
        const Rational scale(mu, mu + 1);
        alpha *= scale;
        delta *= scale;
    }
    return {alpha, delta};
}

inline Rational predicted_drift(std::size_t mu, std::size_t n, const Rational& chi,
                                const Rational& diversity,
                                TieBreaking tie = TieBreaking::prefer_offspring) {
    const auto [alpha, delta] = alpha_delta(mu, n, chi, tie);
    return (1 - delta) * diversity + alpha;
}

inline Rational equilibrium(std::size_t mu, std::size_t n, const Rational& chi) {
    const auto [alpha, delta] = alpha_delta(mu, n, chi);
    return alpha / delta;
}

} // namespace exact

} // namespace divlab
