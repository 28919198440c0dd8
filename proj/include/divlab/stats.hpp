#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdint>

namespace divlab {

/// Welford's online mean/variance.
class RunningStat {
public:
    void add(double x) {
        ++count_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(count_);
        m2_ += d * (x - mean_);
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double standard_error() const {
        return count_ > 0 ? stddev() / std::sqrt(static_cast<double>(count_)) : 0.0;
    }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

/// Per-test sigma threshold so that `tests` two-sided tests jointly keep the
/// false-failure probability of a single `base_sigma` test (Bonferroni).
inline double bonferroni_sigma(double base_sigma, std::uint64_t tests) {
    const boost::math::normal_distribution<> normal;
    const double global_p = 2.0 * boost::math::cdf(boost::math::complement(normal, base_sigma));
    const double per_test = global_p / static_cast<double>(tests == 0 ? 1 : tests);
    return boost::math::quantile(boost::math::complement(normal, per_test / 2.0));
}

} // namespace divlab
