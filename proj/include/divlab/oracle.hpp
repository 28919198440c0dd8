#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/engine.hpp"
#include "divlab/errors.hpp"
#include "divlab/population.hpp"
#include "divlab/rational.hpp"

namespace divlab {

using ExactDist = std::map<BitString, Rational>;

struct OracleLimits {
    std::size_t max_n = 4;
    std::size_t max_mu = 3;
};

/// Brute-force one-step model of a configured run: enumerates parent
/// choice(s) x crossover outcome x mutation outcome x removal index with
/// exact rational weights. Every outcome diversity is recomputed from
/// scratch by the pairwise double sum, so the result is independent of both
/// the incremental cache and the closed-form drift prediction it is used to
/// check.
class ExactStepModel {
public:
    explicit ExactStepModel(EngineConfig cfg, OracleLimits limits = {})
        : cfg_(std::move(cfg)) {
        cfg_.validate();
        if (cfg_.n > limits.max_n || cfg_.mu > limits.max_mu) {
            throw CapabilityError("exact drift enumeration limited to n <= " +
                                  std::to_string(limits.max_n) + ", mu <= " +
                                  std::to_string(limits.max_mu) +
                                  " (override the limits to force larger instances)");
        }
        if (cfg_.crossover && !cfg_.crossover->exact_enumerable()) {
            throw CapabilityError("crossover '" + cfg_.crossover->spec_string() +
                                  "' is not exactly enumerable");
        }
        flip_masks_ = cfg_.mutation.exact_flip_mask_distribution(cfg_.n);
    }

    const EngineConfig& config() const { return cfg_; }

    /// Offspring distribution for the ordered parent pair (x1, x2):
    /// crossover with probability pc (boring otherwise), then mutation.
    const ExactDist& offspring_distribution(const BitString& x1, const BitString& x2) const {
        const auto key = std::make_pair(x1.value(), x2.value());
        const auto it = pair_cache_.find(key);
        if (it != pair_cache_.end()) return it->second;

        ExactDist pre;
        const Rational pc = cfg_.crossover_prob;
        if (pc < 1) {
            pre[x1] += (1 - pc) / 2;
            pre[x2] += (1 - pc) / 2;
        }
        if (pc > 0) {
            for (const auto& [y, p] : cfg_.crossover->exact_distribution(x1, x2, cfg_.n)) {
                pre[y] += pc * p;
            }
        }
        return pair_cache_.emplace(key, mutated(pre)).first->second;
    }

    /// E(S(P_{t+1})) for the configured scheme started at P.
    Rational expected_next_diversity(const Population& pop) const {
        if (pop.size() != cfg_.mu || pop.genome_length() != cfg_.n) {
            throw UsageError("population does not match the configuration");
        }
        const std::size_t mu = cfg_.mu;

        // Marginal offspring distribution. Removal is independent of which
        // parents produced the offspring, so marginalising first is exact.
        ExactDist offspring;
        if (cfg_.crossover) {
            if (cfg_.parents == ParentSampling::with_replacement) {
                const Rational w(1, mu * mu);
                for (std::size_t i = 0; i < mu; ++i) {
                    for (std::size_t j = 0; j < mu; ++j) {
                        for (const auto& [y, p] :
                             offspring_distribution(pop.member(i), pop.member(j))) {
                            offspring[y] += w * p;
                        }
                    }
                }
            } else {
                const Rational w(1, mu * (mu - 1));
                for (std::size_t i = 0; i < mu; ++i) {
                    for (std::size_t j = 0; j < mu; ++j) {
                        if (i == j) continue;
                        for (const auto& [y, p] :
                             offspring_distribution(pop.member(i), pop.member(j))) {
                            offspring[y] += w * p;
                        }
                    }
                }
            }
        } else {
            const Rational w(1, mu);
            for (std::size_t i = 0; i < mu; ++i) {
                for (const auto& [mask, p] : flip_masks_) {
                    offspring[pop.member(i) ^ mask] += w * p;
                }
            }
        }

        Rational expected = 0;
        for (const auto& [y, q] : offspring) {
            Rational sum_over_removals = 0;
            for (std::size_t d = 0; d < mu; ++d) {
                sum_over_removals += Rational(next_diversity_from_scratch(pop, d, y));
            }
            if (cfg_.tie == TieBreaking::prefer_offspring) {
                expected += q * sum_over_removals / Rational(mu);
            } else {
                // Pool of mu+1: each member and the offspring itself are
                // discarded with probability 1/(mu+1).
                expected += q * (sum_over_removals + Rational(pop.diversity())) /
                            Rational(mu + 1);
            }
        }
        return expected;
    }

private:
    ExactDist mutated(const ExactDist& pre) const {
        ExactDist out;
        for (const auto& [z, w] : pre) {
            for (const auto& [mask, p] : flip_masks_) out[z ^ mask] += w * p;
        }
        return out;
    }

    /// Diversity of P with member d replaced by y, by the full double sum.
    static std::uint64_t next_diversity_from_scratch(const Population& pop, std::size_t d,
                                                     const BitString& y) {
        const std::size_t mu = pop.size();
        std::uint64_t total = 0;
        const auto get = [&](std::size_t i) -> const BitString& {
            return i == d ? y : pop.member(i);
        };
        for (std::size_t i = 0; i < mu; ++i) {
            for (std::size_t j = 0; j < mu; ++j) total += hamming(get(i), get(j));
        }
        return total;
    }

    EngineConfig cfg_;
    ExactDist flip_masks_;
    mutable std::map<std::pair<std::uint64_t, std::uint64_t>, ExactDist> pair_cache_;
};

inline Rational exact_one_step_drift(const EngineConfig& cfg, const Population& pop,
                                     OracleLimits limits = {}) {
    return ExactStepModel(cfg, limits).expected_next_diversity(pop);
}

/// All populations of size mu over {0,1}^n as multisets (member order does
/// not affect any quantity of interest). Deterministic order.
inline std::vector<Population> all_populations(std::size_t mu, std::size_t n) {
    if (n > 10) throw CapabilityError("population enumeration limited to n <= 10");
    std::vector<Population> result;
    std::vector<std::uint64_t> current(mu, 0);
    const std::uint64_t limit = 1ULL << n;
    for (;;) {
        std::vector<BitString> members;
        members.reserve(mu);
        for (const std::uint64_t v : current) members.push_back(BitString::from_value(v, n));
        result.emplace_back(std::move(members));

        // next non-decreasing tuple
        std::size_t pos = mu;
        while (pos-- > 0) {
            if (current[pos] + 1 < limit) {
                const std::uint64_t next = current[pos] + 1;
                for (std::size_t j = pos; j < mu; ++j) current[j] = next;
                break;
            }
            if (pos == 0) return result;
        }
    }
}

} // namespace divlab
