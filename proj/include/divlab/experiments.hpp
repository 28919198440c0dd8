#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "divlab/engine.hpp"
#include "divlab/population.hpp"
#include "divlab/rng.hpp"
#include "divlab/stats.hpp"
#include "divlab/theory.hpp"

namespace divlab {

namespace detail {

/// Runs `count` independent trials across `jobs` threads. Results land in a
/// vector indexed by trial, and the reduction happens serially in index
/// order afterwards, so any parallelism degree produces identical output.
template <typename Fn>
std::vector<double> run_trials(std::uint64_t count, unsigned jobs, Fn&& trial) {
    std::vector<double> results(count, 0.0);
    const unsigned workers = std::max(1u, jobs);
    if (workers == 1) {
        for (std::uint64_t i = 0; i < count; ++i) results[i] = trial(i);
        return results;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::uint64_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                const std::uint64_t from = w * chunk;
                const std::uint64_t to = std::min(count, from + chunk);
                for (std::uint64_t i = from; i < to; ++i) results[i] = trial(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

} // namespace detail

struct DriftCheckResult {
    std::uint64_t s_start = 0;
    double predicted = 0;
    double empirical = 0;
    double se = 0;
    std::uint64_t trials = 0;
    double sigma = 4.0;
    double floor = 0;
    bool pass = false;

    double deviation() const { return std::abs(empirical - predicted); }
};

/// Runs m independent single steps from `start` (per-trial seeds derived
/// from the campaign seed by counter) and compares the mean next diversity
/// against the drift prediction. Passes iff the deviation is within
/// sigma * SE plus an absolute floor of 1e-6 * |predicted|.
inline DriftCheckResult drift_check(const EngineConfig& cfg, const Population& start,
                                    std::uint64_t trials, double sigma = 4.0,
                                    unsigned jobs = 1) {
    cfg.validate();
    if (trials < 1) throw UsageError("at least one trial required");
    const auto samples = detail::run_trials(trials, jobs, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        Population pop = start;
        step(cfg, pop, rng);
        return static_cast<double>(pop.diversity());
    });
    RunningStat stat;
    for (const double s : samples) stat.add(s);

    DriftCheckResult result;
    result.s_start = start.diversity();
    result.predicted = predicted_drift(cfg.theory_params(), static_cast<double>(result.s_start));
    result.empirical = stat.mean();
    result.se = stat.standard_error();
    result.trials = trials;
    result.sigma = sigma;
    result.floor = 1e-6 * std::abs(result.predicted);
    result.pass = result.deviation() <= sigma * result.se + result.floor;
    return result;
}

struct EquilibriumResult {
    double time_averaged = 0;
    double equilibrium = 0;
    double relative_error = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t window = 0;
    bool burn_in_warning = false;  ///< burn-in shorter than the approach-time bound
};

/// Single long run; averages S over t in [burn_in, burn_in + window]. Under
/// stationarity the mean of S is exactly the equilibrium, so the average
/// must approach it as the window grows.
inline EquilibriumResult equilibrium_check(const EngineConfig& cfg, std::uint64_t burn_in,
                                           std::uint64_t window) {
    cfg.validate();
    if (window < 1) throw UsageError("averaging window must be positive");
    Rng rng(cfg.seed);
    Population pop = initial_population(cfg, rng);

    RunningStat stat;
    for (std::uint64_t t = 0; t <= burn_in + window; ++t) {
        if (t >= burn_in) stat.add(static_cast<double>(pop.diversity()));
        if (t < burn_in + window) step(cfg, pop, rng);
    }

    EquilibriumResult result;
    result.burn_in = burn_in;
    result.window = window;
    result.time_averaged = stat.mean();
    result.equilibrium = equilibrium(cfg.theory_params());
    result.relative_error =
        std::abs(result.time_averaged - result.equilibrium) / result.equilibrium;
    const auto bounds = hitting_time_bounds(cfg.theory_params(0.5));
    result.burn_in_warning = static_cast<double>(burn_in) < bounds.down;
    return result;
}

enum class HittingDirection { down, up };

enum class ExperimentStatus { pass, fail, inconclusive };

struct HittingTimeResult {
    HittingDirection direction = HittingDirection::down;
    double eps = 0;
    double threshold = 0;
    double equilibrium = 0;
    double bound = 0;
    double mean_time = 0;      ///< capped trials enter at their cap value
    double se = 0;             ///< standard error of the mean time
    std::uint64_t trials = 0;
    std::uint64_t capped = 0;
    std::uint64_t cap = 0;
    std::uint64_t landed_inside = 0;  ///< first crossings inside [1-eps,1+eps]*S0
    ExperimentStatus status = ExperimentStatus::fail;
};

/// Measures the first time the diversity crosses (1+eps)S0 downwards or
/// (1-eps)S0 upwards, over independent trials. Each trial is capped at ten
/// times the theoretical bound; capped trials are reported, never dropped.
/// A start that already satisfies the threshold has hitting time zero.
inline HittingTimeResult hitting_time_experiment(const EngineConfig& cfg, double eps,
                                                 HittingDirection direction,
                                                 std::uint64_t trials, unsigned jobs = 1) {
    cfg.validate();
    const TheoryParams params = cfg.theory_params(eps);
    const auto bounds = hitting_time_bounds(params);
    const double s0 = equilibrium(params);

    HittingTimeResult result;
    result.direction = direction;
    result.eps = eps;
    result.equilibrium = s0;
    result.bound = direction == HittingDirection::down ? bounds.down : bounds.up;
    result.threshold = direction == HittingDirection::down ? (1.0 + eps) * s0 : (1.0 - eps) * s0;
    result.trials = trials;
    result.cap = static_cast<std::uint64_t>(std::ceil(10.0 * result.bound)) + 1;

    const double lo = (1.0 - eps) * s0;
    const double hi = (1.0 + eps) * s0;
    const auto crossed = [&](std::uint64_t s) {
        const double sd = static_cast<double>(s);
        return direction == HittingDirection::down ? sd <= result.threshold
                                                   : sd >= result.threshold;
    };

    struct TrialOutcome {
        std::uint64_t time;
        bool capped;
        bool landed;
    };
    std::vector<TrialOutcome> outcomes(trials);
    detail::run_trials(trials, jobs, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        Population pop = initial_population(cfg, rng);
        std::uint64_t t = 0;
        bool capped = true;
        while (t <= result.cap) {
            if (crossed(pop.diversity())) {
                capped = false;
                break;
            }
            step(cfg, pop, rng);
            ++t;
        }
        const double landing = static_cast<double>(pop.diversity());
        outcomes[i] = {capped ? result.cap : t, capped,
                       !capped && landing >= lo && landing <= hi};
        return 0.0;
    });

    RunningStat stat;
    for (const auto& o : outcomes) {
        stat.add(static_cast<double>(o.time));
        result.capped += o.capped;
        result.landed_inside += o.landed;
    }
    result.mean_time = stat.mean();
    result.se = stat.standard_error();
    if (result.capped == trials) {
        result.status = ExperimentStatus::inconclusive;
    } else {
        result.status = result.mean_time <= result.bound ? ExperimentStatus::pass
                                                         : ExperimentStatus::fail;
    }
    return result;
}

struct TieBreakingComparison {
    DriftCheckResult prefer_offspring;
    DriftCheckResult uniform_random;
};

/// Runs the same drift check under both tie-breaking policies from the same
/// start. Each side is compared against its own prediction; the two
/// predictions differ exactly by the factor mu/(mu+1) on both coefficients.
inline TieBreakingComparison tie_breaking_comparison(const EngineConfig& cfg,
                                                     std::uint64_t trials, double sigma = 4.0,
                                                     unsigned jobs = 1) {
    Rng rng(cfg.seed);
    const Population start = initial_population(cfg, rng);

    EngineConfig prefer = cfg;
    prefer.tie = TieBreaking::prefer_offspring;
    EngineConfig uniform = cfg;
    uniform.tie = TieBreaking::uniform_random;
    uniform.seed = derive_seed(cfg.seed, 0x71E);

    return {drift_check(prefer, start, trials, sigma, jobs),
            drift_check(uniform, start, trials, sigma, jobs)};
}

} // namespace divlab
