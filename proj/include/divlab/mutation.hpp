#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/errors.hpp"
#include "divlab/rational.hpp"
#include "divlab/rng.hpp"

namespace divlab {

enum class MutationKind { standard_bit, k_flip, heavy_tailed };

inline constexpr std::size_t kExactEnumerationLimit = 10;

/// Unbiased mutation operator: per-position flip probability is identical
/// across positions and independent of bit values. Three kinds:
///   standard-bit(p)   - each bit flips independently with probability p
///   k-flip(k)         - a uniform k-subset of positions flips
///   heavy-tailed(tau) - flip count K ~ k^(-tau)/Z on [1, n], then a uniform
///                       K-subset flips
///
/// Immutable descriptor; sampling takes an explicit random source.
class MutationOp {
public:
    static MutationOp standard_bit(std::size_t n, const Rational& rate) {
        if (rate < 0 || rate > 1) throw UsageError("mutation rate must be in [0, 1]");
        MutationOp op(MutationKind::standard_bit, n);
        op.rate_ = rate;
        op.rate_dbl_ = to_double(rate);
        return op;
    }

    static MutationOp k_flip(std::size_t n, unsigned k) {
        if (k < 1 || k > n) throw UsageError("flip count must be in [1, n]");
        MutationOp op(MutationKind::k_flip, n);
        op.k_ = k;
        return op;
    }

    static MutationOp heavy_tailed(std::size_t n, double tau) {
        if (!(tau > 0)) throw UsageError("heavy-tailed exponent must be positive");
        MutationOp op(MutationKind::heavy_tailed, n);
        op.tau_ = tau;
        op.heavy_cdf_.resize(n);
        double z = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            z += std::pow(static_cast<double>(k), -tau);
            op.heavy_cdf_[k - 1] = z;
        }
        for (auto& c : op.heavy_cdf_) c /= z;
        op.heavy_cdf_.back() = 1.0;
        return op;
    }

    /// Parses "sbm:p=<rational>", "kflip:k=<int>" or "heavy:tau=<real>".
    static MutationOp parse(std::string_view spec, std::size_t n) {
        if (spec.starts_with("sbm:p=")) {
            return standard_bit(n, parse_rational(spec.substr(6)));
        }
        if (spec.starts_with("kflip:k=")) {
            const auto arg = std::string(spec.substr(8));
            return k_flip(n, static_cast<unsigned>(std::stoul(arg)));
        }
        if (spec.starts_with("heavy:tau=")) {
            const auto arg = std::string(spec.substr(10));
            return heavy_tailed(n, std::stod(arg));
        }
        throw UsageError("unknown mutation spec '" + std::string(spec) +
                         "' (expected sbm:p=, kflip:k= or heavy:tau=)");
    }

    MutationKind kind() const { return kind_; }
    std::size_t genome_length() const { return n_; }

    std::string spec_string() const {
        switch (kind_) {
            case MutationKind::standard_bit: return "sbm:p=" + rate_.str();
            case MutationKind::k_flip: return "kflip:k=" + std::to_string(k_);
            case MutationKind::heavy_tailed: {
                std::string t = std::to_string(tau_);
                t.erase(t.find_last_not_of('0') + 1);
                if (!t.empty() && t.back() == '.') t.pop_back();
                return "heavy:tau=" + t;
            }
        }
        return {};
    }

    /// Expected number of flipped bits (chi).
    double expected_flips() const {
        switch (kind_) {
            case MutationKind::standard_bit:
                return static_cast<double>(n_) * rate_dbl_;
            case MutationKind::k_flip:
                return static_cast<double>(k_);
            case MutationKind::heavy_tailed: {
                double z = 0, m = 0;
                for (std::size_t k = 1; k <= n_; ++k) {
                    const double w = std::pow(static_cast<double>(k), -tau_);
                    z += w;
                    m += static_cast<double>(k) * w;
                }
                return m / z;
            }
        }
        return 0;
    }

    /// chi as an exact rational. Heavy-tailed requires an integer exponent;
    /// otherwise the weights k^(-tau) are irrational.
    Rational expected_flips_exact() const {
        switch (kind_) {
            case MutationKind::standard_bit:
                return Rational(n_) * rate_;
            case MutationKind::k_flip:
                return Rational(k_);
            case MutationKind::heavy_tailed: {
                const long t = integer_tau();
                Rational z = 0, m = 0;
                for (std::size_t k = 1; k <= n_; ++k) {
                    Rational w(1, power(k, t));
                    z += w;
                    m += Rational(k) * w;
                }
                return m / z;
            }
        }
        return 0;
    }

    BitString mutate(const BitString& x, Rng& rng) const {
        if (x.size() != n_) throw UsageError("bit string length mismatch");
        switch (kind_) {
            case MutationKind::standard_bit: {
                BitString y(x);
                for (std::size_t i = 0; i < n_; ++i) {
                    if (rng.bernoulli(rate_dbl_)) y.flip(i);
                }
                return y;
            }
            case MutationKind::k_flip:
                return x ^ random_subset_mask(k_, rng);
            case MutationKind::heavy_tailed: {
                const double u = rng.real01();
                const auto it = std::upper_bound(heavy_cdf_.begin(), heavy_cdf_.end(), u);
                const std::size_t k = static_cast<std::size_t>(it - heavy_cdf_.begin()) + 1;
                return x ^ random_subset_mask(k, rng);
            }
        }
        return x;
    }

    /// Distribution of the flip mask, independent of the input by
    /// unbiasedness. Probabilities are exact rationals summing to 1.
    std::map<BitString, Rational> exact_flip_mask_distribution(
        std::size_t limit = kExactEnumerationLimit) const {
        if (n_ > limit) {
            throw CapabilityError("exact mutation distribution limited to n <= " +
                                  std::to_string(limit));
        }
        std::map<BitString, Rational> dist;
        switch (kind_) {
            case MutationKind::standard_bit: {
                const Rational p = rate_;
                const Rational q = 1 - p;
                for (std::uint64_t m = 0; m < (1ULL << n_); ++m) {
                    const BitString mask = BitString::from_value(m, n_);
                    const std::size_t flips = mask.count_ones();
                    Rational w = 1;
                    for (std::size_t i = 0; i < flips; ++i) w *= p;
                    for (std::size_t i = flips; i < n_; ++i) w *= q;
                    if (w != 0) dist[mask] = w;
                }
                break;
            }
            case MutationKind::k_flip: {
                const Rational w(1, binomial(n_, k_));
                for (std::uint64_t m = 0; m < (1ULL << n_); ++m) {
                    if (std::popcount(m) == static_cast<int>(k_)) {
                        dist[BitString::from_value(m, n_)] = w;
                    }
                }
                break;
            }
            case MutationKind::heavy_tailed: {
                const long t = integer_tau();
                Rational z = 0;
                for (std::size_t k = 1; k <= n_; ++k) z += Rational(1, power(k, t));
                for (std::uint64_t m = 1; m < (1ULL << n_); ++m) {
                    const std::size_t k = static_cast<std::size_t>(std::popcount(m));
                    const Rational w = Rational(1, power(k, t)) / (z * binomial(n_, k));
                    dist[BitString::from_value(m, n_)] = w;
                }
                break;
            }
        }
        return dist;
    }

    /// Exact output distribution for input x: flip-mask distribution xored
    /// onto x.
    std::map<BitString, Rational> exact_mutation_distribution(
        const BitString& x, std::size_t limit = kExactEnumerationLimit) const {
        if (x.size() != n_) throw UsageError("bit string length mismatch");
        std::map<BitString, Rational> dist;
        for (const auto& [mask, p] : exact_flip_mask_distribution(limit)) {
            dist[x ^ mask] = p;
        }
        return dist;
    }

    static BigInt binomial(std::size_t n, std::size_t k) {
        if (k > n) return 0;
        BigInt result = 1;
        for (std::size_t i = 0; i < k; ++i) {
            result = result * static_cast<unsigned long>(n - i) / static_cast<unsigned long>(i + 1);
        }
        return result;
    }

private:
    MutationOp(MutationKind kind, std::size_t n) : kind_(kind), n_(n) {
        if (n == 0) throw UsageError("genome length must be positive");
    }

    long integer_tau() const {
        const double r = std::round(tau_);
        if (std::abs(tau_ - r) > 1e-12 || r < 1) {
            throw CapabilityError("exact heavy-tailed distribution requires an integer exponent");
        }
        return static_cast<long>(r);
    }

    static BigInt power(std::size_t base, long exp) {
        BigInt result = 1;
        for (long i = 0; i < exp; ++i) result *= static_cast<unsigned long>(base);
        return result;
    }

    /// Floyd's algorithm: uniform k-subset of [0, n), returned as a mask.
    BitString random_subset_mask(std::size_t k, Rng& rng) const {
        BitString mask(n_);
        for (std::size_t j = n_ - k; j < n_; ++j) {
            const std::size_t t = static_cast<std::size_t>(rng.index(j + 1));
            if (mask.test(t)) {
                mask.set(j, true);
            } else {
                mask.set(t, true);
            }
        }
        return mask;
    }

    MutationKind kind_;
    std::size_t n_;
    Rational rate_ = 0;
    double rate_dbl_ = 0;
    unsigned k_ = 0;
    double tau_ = 0;
    std::vector<double> heavy_cdf_;
};

} // namespace divlab
