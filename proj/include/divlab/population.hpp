#pragma once

#include <cassert>
#include <cstdint>
#include <utility>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/errors.hpp"
#include "divlab/rng.hpp"

namespace divlab {

/// Multiset of mu genomes with incrementally maintained diversity.
///
/// The diversity S(P) is the ordered double sum of pairwise Hamming
/// distances (each unordered pair counted twice). It is kept as an exact
/// integer via per-position one-counts: S = 2 * sum_i c_i * (mu - c_i),
/// updated in O(n) per replacement.
class Population {
public:
    explicit Population(std::vector<BitString> members) : members_(std::move(members)) {
        if (members_.empty()) throw UsageError("population must not be empty");
        n_ = members_[0].size();
        for (const auto& m : members_) {
            if (m.size() != n_) throw UsageError("population members must share one length");
        }
        one_counts_.assign(n_, 0);
        for (const auto& m : members_) {
            for (const std::size_t i : m.one_positions()) ++one_counts_[i];
        }
        diversity_ = diversity_from_counts();
    }

    static Population monomorphic(std::size_t mu, std::size_t n, bool ones = false) {
        const BitString seed = ones ? BitString::all_ones(n) : BitString(n);
        return Population(std::vector<BitString>(mu, seed));
    }

    /// ceil(mu/2) all-zero strings plus floor(mu/2) all-one strings;
    /// diversity 2*ceil(mu/2)*floor(mu/2)*n, the maximum attainable.
    static Population max_diversity(std::size_t mu, std::size_t n) {
        std::vector<BitString> members(mu - mu / 2, BitString(n));
        members.insert(members.end(), mu / 2, BitString::all_ones(n));
        return Population(std::move(members));
    }

    static Population uniform_random(std::size_t mu, std::size_t n, Rng& rng) {
        std::vector<BitString> members;
        members.reserve(mu);
        for (std::size_t i = 0; i < mu; ++i) members.push_back(BitString::random(n, rng));
        return Population(std::move(members));
    }

    std::size_t size() const { return members_.size(); }
    std::size_t genome_length() const { return n_; }
    const BitString& member(std::size_t i) const {
        if (i >= members_.size()) throw UsageError("member index out of range");
        return members_[i];
    }
    const std::vector<BitString>& members() const { return members_; }

    std::uint32_t one_count(std::size_t position) const {
        if (position >= n_) throw UsageError("position out of range");
        return one_counts_[position];
    }

    /// Current S(P); O(1).
    std::uint64_t diversity() const { return diversity_; }

    /// S_P(y) = sum of Hamming distances from y to every member.
    std::uint64_t point_diversity(const BitString& y) const {
        if (y.size() != n_) throw UsageError("bit string length mismatch");
        std::uint64_t total = 0;
        for (const auto& m : members_) total += hamming(m, y);
        return total;
    }

    /// Replaces member `index` by `y`; one-counts and the diversity cache
    /// are updated from the changed positions only.
    void replace(std::size_t index, const BitString& y) {
        if (index >= members_.size()) throw UsageError("member index out of range");
        if (y.size() != n_) throw UsageError("bit string length mismatch");
        const std::uint64_t mu = members_.size();
        const BitString diff = members_[index] ^ y;
        std::int64_t delta = 0;
        for (const std::size_t i : diff.one_positions()) {
            const std::uint64_t c_old = one_counts_[i];
            const std::uint64_t c_new = y.test(i) ? c_old + 1 : c_old - 1;
            one_counts_[i] = static_cast<std::uint32_t>(c_new);
            delta += static_cast<std::int64_t>(2 * c_new * (mu - c_new)) -
                     static_cast<std::int64_t>(2 * c_old * (mu - c_old));
        }
        members_[index] = y;
        diversity_ = static_cast<std::uint64_t>(static_cast<std::int64_t>(diversity_) + delta);
        assert(diversity_ == diversity_from_counts());
    }

    /// From-scratch ordered double sum; O(mu^2 n). Reference implementation
    /// for tests and oracles, independent of the cache.
    std::uint64_t diversity_from_scratch() const {
        std::uint64_t total = 0;
        for (const auto& a : members_) {
            for (const auto& b : members_) total += hamming(a, b);
        }
        return total;
    }

    /// 2 * sum_i c_i (mu - c_i), from the count vector.
    std::uint64_t diversity_from_counts() const {
        const std::uint64_t mu = members_.size();
        std::uint64_t total = 0;
        for (const std::uint64_t c : one_counts_) total += 2 * c * (mu - c);
        return total;
    }

private:
    std::size_t n_;
    std::vector<BitString> members_;
    std::vector<std::uint32_t> one_counts_;
    std::uint64_t diversity_;
};

/// Largest one-step diversity change: 2(mu-1)n.
inline std::uint64_t max_step_change(std::size_t mu, std::size_t n) {
    return 2 * static_cast<std::uint64_t>(mu - 1) * n;
}

/// Upper bound mu^2 n / 2 on the diversity of any population.
inline double diversity_upper_bound(std::size_t mu, std::size_t n) {
    return 0.5 * static_cast<double>(mu) * static_cast<double>(mu) * static_cast<double>(n);
}

/// Exact maximum 2*ceil(mu/2)*floor(mu/2)*n, attained by max_diversity().
inline std::uint64_t max_diversity_value(std::size_t mu, std::size_t n) {
    return 2 * static_cast<std::uint64_t>((mu + 1) / 2) * (mu / 2) * n;
}

} // namespace divlab
