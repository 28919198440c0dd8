#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/crossover.hpp"
#include "divlab/errors.hpp"
#include "divlab/mutation.hpp"
#include "divlab/rational.hpp"
#include "divlab/rng.hpp"
#include "divlab/stats.hpp"

namespace divlab {

/// Certified operator properties:
///   diversity-neutral:  E(H(c(x1,x2),z) + H(c(x2,x1),z)) = H(x1,z) + H(x2,z)
///                       for all x1, x2, z
///   respectful:         offspring agrees with the parents wherever they agree
///   oim:                respectful with a mask distribution (restricted to
///                       the differing positions, where it is unique) that is
///                       identical for both parent orders
///   unbiased:           output distribution invariant under simultaneous
///                       position permutations and xor shifts
enum class OperatorProperty { diversity_neutral, respectful, oim, unbiased };

inline const char* property_name(OperatorProperty p) {
    switch (p) {
        case OperatorProperty::diversity_neutral: return "diversity-neutral";
        case OperatorProperty::respectful: return "respectful";
        case OperatorProperty::oim: return "oim";
        case OperatorProperty::unbiased: return "unbiased";
    }
    return "";
}

enum class CertMode { exact, statistical };

struct StatParams {
    std::uint64_t seed = 0;
    std::uint64_t cases = 0;             ///< triples or pairs tested
    std::uint64_t samples_per_case = 0;
    double sigma_threshold = 0;          ///< Bonferroni-adjusted, mean tests only
};

struct CertWitness {
    BitString x1;
    BitString x2;
    std::optional<BitString> z;          ///< neutrality triples
    std::optional<BitString> offspring;  ///< respectfulness violations
    std::string measured;
    std::string expected;
    std::string note;
};

struct Verdict {
    OperatorProperty property;
    bool holds = false;
    CertMode mode = CertMode::exact;
    std::optional<CertWitness> witness;  ///< present exactly when !holds
    std::optional<StatParams> stats;     ///< present exactly when statistical
};

inline constexpr std::size_t kCertifyExactLimit = 3;

namespace detail {

inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> result;
    do {
        result.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

inline BitString permute(const BitString& x, const std::vector<std::size_t>& perm) {
    BitString y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y.set(perm[i], x.test(i));
    return y;
}

/// Expected Hamming distance to z under an exact output distribution.
inline Rational expected_distance(const std::map<BitString, Rational>& dist, const BitString& z) {
    Rational e = 0;
    for (const auto& [y, p] : dist) e += p * Rational(hamming(y, z));
    return e;
}

/// Offspring bits on positions where the parents agree must match them.
inline bool respects(const BitString& y, const BitString& x1, const BitString& x2) {
    const BitString agree = (x1 ^ x2).complement();
    return ((y ^ x1) & agree).count_ones() == 0;
}

} // namespace detail

/// Exact neutrality certificate over every (x1, x2, z) triple.
/// Requires an exactly enumerable operator and small n.
inline Verdict certify_diversity_neutral_exact(const CrossoverOp& op, std::size_t n,
                                               std::size_t limit = kCertifyExactLimit) {
    if (!op.exact_enumerable() || n > limit) {
        throw CapabilityError("exact neutrality certification unavailable for '" +
                              op.spec_string() + "' at n=" + std::to_string(n));
    }
    Verdict v{OperatorProperty::diversity_neutral, true, CertMode::exact, {}, {}};
    const std::uint64_t count = 1ULL << n;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::map<BitString, Rational>> cache;
    const auto dist = [&](const BitString& a, const BitString& b) -> const auto& {
        const auto key = std::make_pair(a.value(), b.value());
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, op.exact_distribution(a, b, n)).first;
        return it->second;
    };
    for (std::uint64_t v1 = 0; v1 < count; ++v1) {
        const BitString x1 = BitString::from_value(v1, n);
        for (std::uint64_t v2 = 0; v2 < count; ++v2) {
            const BitString x2 = BitString::from_value(v2, n);
            const auto& d12 = dist(x1, x2);
            const auto& d21 = dist(x2, x1);
            for (std::uint64_t vz = 0; vz < count; ++vz) {
                const BitString z = BitString::from_value(vz, n);
                const Rational lhs =
                    detail::expected_distance(d12, z) + detail::expected_distance(d21, z);
                const Rational rhs = Rational(hamming(x1, z)) + Rational(hamming(x2, z));
                if (lhs != rhs) {
                    v.holds = false;
                    v.witness = CertWitness{x1, x2, z, {}, lhs.str(), rhs.str(), {}};
                    return v;
                }
            }
        }
    }
    return v;
}

/// Monte Carlo neutrality check: the sampled mean of
/// H(c(x1,x2),z) + H(c(x2,x1),z) must match H(x1,z) + H(x2,z) within a
/// Bonferroni-adjusted sigma band plus a small absolute floor, for every
/// tested triple. With all-triples coverage at small n this reliably
/// falsifies the non-enumerable operators.
inline Verdict certify_diversity_neutral_statistical(const CrossoverOp& op, std::size_t n,
                                                     std::uint64_t seed,
                                                     std::uint64_t samples_per_triple = 2000,
                                                     double base_sigma = 4.0) {
    Verdict v{OperatorProperty::diversity_neutral, true, CertMode::statistical, {}, {}};
    std::vector<std::array<BitString, 3>> triples;
    if (n <= kCertifyExactLimit) {
        const std::uint64_t count = 1ULL << n;
        for (std::uint64_t v1 = 0; v1 < count; ++v1) {
            for (std::uint64_t v2 = 0; v2 < count; ++v2) {
                for (std::uint64_t vz = 0; vz < count; ++vz) {
                    triples.push_back({BitString::from_value(v1, n),
                                       BitString::from_value(v2, n),
                                       BitString::from_value(vz, n)});
                }
            }
        }
    } else {
        Rng pick(derive_seed(seed, 0x7121));
        for (int i = 0; i < 512; ++i) {
            triples.push_back({BitString::random(n, pick), BitString::random(n, pick),
                               BitString::random(n, pick)});
        }
    }
    const double sigma = bonferroni_sigma(base_sigma, triples.size());
    v.stats = StatParams{seed, triples.size(), samples_per_triple, sigma};

    std::uint64_t index = 0;
    for (const auto& [x1, x2, z] : triples) {
        Rng rng(derive_seed(seed, ++index));
        RunningStat stat;
        for (std::uint64_t s = 0; s < samples_per_triple; ++s) {
            const double h = static_cast<double>(hamming(op.apply(x1, x2, rng), z)) +
                             static_cast<double>(hamming(op.apply(x2, x1, rng), z));
            stat.add(h);
        }
        const double rhs = static_cast<double>(hamming(x1, z) + hamming(x2, z));
        const double deviation = std::abs(stat.mean() - rhs);
        const double allowed = sigma * stat.standard_error() + 1e-6 * (1.0 + rhs);
        if (deviation > allowed) {
            v.holds = false;
            v.witness = CertWitness{x1, x2, z, {}, std::to_string(stat.mean()),
                                    std::to_string(rhs), "sampled mean"};
            return v;
        }
    }
    return v;
}

inline Verdict certify_diversity_neutral(const CrossoverOp& op, std::size_t n,
                                         std::uint64_t seed = 1,
                                         std::size_t limit = kCertifyExactLimit) {
    if (op.exact_enumerable() && n <= limit) return certify_diversity_neutral_exact(op, n, limit);
    return certify_diversity_neutral_statistical(op, n, seed);
}

inline Verdict certify_respectful_exact(const CrossoverOp& op, std::size_t n,
                                        std::size_t limit = kCertifyExactLimit) {
    if (!op.exact_enumerable() || n > limit) {
        throw CapabilityError("exact respectfulness certification unavailable for '" +
                              op.spec_string() + "' at n=" + std::to_string(n));
    }
    Verdict v{OperatorProperty::respectful, true, CertMode::exact, {}, {}};
    const std::uint64_t count = 1ULL << n;
    for (std::uint64_t v1 = 0; v1 < count; ++v1) {
        const BitString x1 = BitString::from_value(v1, n);
        for (std::uint64_t v2 = 0; v2 < count; ++v2) {
            const BitString x2 = BitString::from_value(v2, n);
            for (const auto& [y, p] : op.exact_distribution(x1, x2, n)) {
                if (p != 0 && !detail::respects(y, x1, x2)) {
                    v.holds = false;
                    v.witness = CertWitness{x1, x2, {}, y, p.str(),
                                            "0", "positive-probability disagreement"};
                    return v;
                }
            }
        }
    }
    return v;
}

/// A single sampled violation is a sound disproof; absence of violations is
/// statistical evidence only.
inline Verdict certify_respectful_statistical(const CrossoverOp& op, std::size_t n,
                                              std::uint64_t seed, std::uint64_t pairs = 10000,
                                              std::uint64_t samples_per_pair = 1) {
    Verdict v{OperatorProperty::respectful, true, CertMode::statistical, {}, {}};
    v.stats = StatParams{seed, pairs, samples_per_pair, 0};
    Rng pair_rng(derive_seed(seed, 0xA11));
    Rng sample_rng(derive_seed(seed, 0xB22));
    const std::uint64_t count = n <= kCertifyExactLimit ? (1ULL << (2 * n)) : pairs;
    if (n <= kCertifyExactLimit) v.stats->cases = count;
    for (std::uint64_t c = 0; c < count; ++c) {
        BitString x1(n), x2(n);
        if (n <= kCertifyExactLimit) {
            x1 = BitString::from_value(c & ((1ULL << n) - 1), n);
            x2 = BitString::from_value(c >> n, n);
        } else {
            x1 = BitString::random(n, pair_rng);
            x2 = BitString::random(n, pair_rng);
        }
        for (std::uint64_t s = 0; s < samples_per_pair; ++s) {
            const BitString y = op.apply(x1, x2, sample_rng);
            if (!detail::respects(y, x1, x2)) {
                v.holds = false;
                v.witness = CertWitness{x1, x2, {}, y, "", "",
                                        "sampled offspring disagrees on an agreeing position"};
                return v;
            }
        }
    }
    return v;
}

inline Verdict certify_respectful(const CrossoverOp& op, std::size_t n, std::uint64_t seed = 1,
                                  std::size_t limit = kCertifyExactLimit,
                                  std::uint64_t samples_per_pair = 64) {
    if (op.exact_enumerable() && n <= limit) return certify_respectful_exact(op, n, limit);
    return certify_respectful_statistical(
        op, n, seed, 10000, n <= limit ? samples_per_pair : std::uint64_t{1});
}

/// Order-independent-mask certificate. For a respectful operator the mask
/// distribution restricted to the differing positions is determined by the
/// output distribution, and an order-independent mask exists iff
/// D(y | x1,x2) = D(y ^ (x1^x2) | x2,x1) for every y: flipping the differing
/// bits converts a pattern expressed relative to the first listed parent
/// into the same mask applied to the swapped pair. Mask entries on agreeing
/// positions are unconstrained.
inline Verdict certify_oim(const CrossoverOp& op, std::size_t n,
                           std::size_t limit = kCertifyExactLimit) {
    if (!op.exact_enumerable() || n > limit) {
        throw CapabilityError("OIM certification requires an exactly enumerable operator");
    }
    if (!certify_respectful_exact(op, n, limit).holds) {
        throw UsageError("OIM certification requires a respectful operator");
    }
    Verdict v{OperatorProperty::oim, true, CertMode::exact, {}, {}};
    const std::uint64_t count = 1ULL << n;
    for (std::uint64_t v1 = 0; v1 < count; ++v1) {
        const BitString x1 = BitString::from_value(v1, n);
        for (std::uint64_t v2 = 0; v2 < count; ++v2) {
            const BitString x2 = BitString::from_value(v2, n);
            const BitString diff = x1 ^ x2;
            const auto d12 = op.exact_distribution(x1, x2, n);
            const auto d21 = op.exact_distribution(x2, x1, n);
            for (std::uint64_t vy = 0; vy < count; ++vy) {
                const BitString y = BitString::from_value(vy, n);
                const auto p12 = d12.find(y);
                const auto p21 = d21.find(y ^ diff);
                const Rational a = p12 == d12.end() ? Rational(0) : p12->second;
                const Rational b = p21 == d21.end() ? Rational(0) : p21->second;
                if (a != b) {
                    v.holds = false;
                    v.witness = CertWitness{x1, x2, {}, y, a.str(), b.str(),
                                            "restricted mask weight differs between orders"};
                    return v;
                }
            }
        }
    }
    return v;
}

/// Unbiasedness certificate: the full output distribution must be invariant
/// under every position permutation combined with every xor shift, applied
/// to parents and offspring simultaneously.
inline Verdict certify_unbiased(const CrossoverOp& op, std::size_t n,
                                std::size_t limit = kCertifyExactLimit) {
    if (!op.exact_enumerable() || n > limit) {
        throw CapabilityError("unbiasedness certification requires an exactly enumerable operator");
    }
    Verdict v{OperatorProperty::unbiased, true, CertMode::exact, {}, {}};
    const std::uint64_t count = 1ULL << n;
    const auto perms = detail::all_permutations(n);
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::map<BitString, Rational>> cache;
    const auto dist = [&](const BitString& a, const BitString& b) -> const auto& {
        const auto key = std::make_pair(a.value(), b.value());
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, op.exact_distribution(a, b, n)).first;
        return it->second;
    };
    for (std::uint64_t v1 = 0; v1 < count; ++v1) {
        const BitString x1 = BitString::from_value(v1, n);
        for (std::uint64_t v2 = 0; v2 < count; ++v2) {
            const BitString x2 = BitString::from_value(v2, n);
            const auto& base = dist(x1, x2);
            for (const auto& perm : perms) {
                for (std::uint64_t vz = 0; vz < count; ++vz) {
                    const BitString z = BitString::from_value(vz, n);
                    std::map<BitString, Rational> transformed;
                    for (const auto& [y, p] : base) {
                        transformed[detail::permute(y, perm) ^ z] += p;
                    }
                    const auto& expected =
                        dist(detail::permute(x1, perm) ^ z, detail::permute(x2, perm) ^ z);
                    if (transformed != expected) {
                        v.holds = false;
                        v.witness = CertWitness{x1, x2, z, {}, "", "",
                                                "distribution not invariant under a "
                                                "permutation/xor-shift pair"};
                        return v;
                    }
                }
            }
        }
    }
    return v;
}

/// Definition check for unary operators: used to validate that every
/// mutation operator treats positions and bit values symmetrically.
inline Verdict certify_mutation_unbiased(const MutationOp& op, std::size_t n,
                                         std::size_t limit = kCertifyExactLimit) {
    if (n > limit) throw CapabilityError("mutation unbiasedness check limited to small n");
    Verdict v{OperatorProperty::unbiased, true, CertMode::exact, {}, {}};
    const std::uint64_t count = 1ULL << n;
    const auto perms = detail::all_permutations(n);
    for (std::uint64_t vx = 0; vx < count; ++vx) {
        const BitString x = BitString::from_value(vx, n);
        const auto base = op.exact_mutation_distribution(x, n);
        for (const auto& perm : perms) {
            for (std::uint64_t vz = 0; vz < count; ++vz) {
                const BitString z = BitString::from_value(vz, n);
                std::map<BitString, Rational> transformed;
                for (const auto& [y, p] : base) transformed[detail::permute(y, perm) ^ z] += p;
                const auto expected =
                    op.exact_mutation_distribution(detail::permute(x, perm) ^ z, n);
                if (transformed != expected) {
                    v.holds = false;
                    v.witness = CertWitness{x, x, z, {}, "", "",
                                            "mutation distribution not transform-invariant"};
                    return v;
                }
            }
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Classification of the standard operator set
// ---------------------------------------------------------------------------

struct OperatorReport {
    CrossoverOp op;
    bool claimed_neutral = false;
    Verdict neutral;
    Verdict respectful;
    std::optional<Verdict> oim;       ///< absent when not respectful or not enumerable
    std::optional<Verdict> unbiased;  ///< absent when not enumerable
    bool matches_claim = false;
};

struct ClassificationReport {
    std::size_t n = 0;
    std::vector<OperatorReport> rows;
    std::vector<std::string> implication_violations;
    bool consistent_with_claims = false;
    bool implications_hold = false;
};

/// The operator instances the classification covers. k-point variants are
/// included only when they fit the genome length.
inline std::vector<CrossoverOp> standard_operator_set(std::size_t n) {
    std::vector<CrossoverOp> ops;
    for (const char* bias : {"0", "1/4", "1/2", "1"}) {
        ops.push_back(CrossoverOp::uniform(parse_rational(bias)));
    }
    for (unsigned k : {1u, 2u}) {
        if (k <= n - 1) ops.push_back(CrossoverOp::k_point(k));
    }
    for (const CrossoverKind kind :
         {CrossoverKind::boring, CrossoverKind::shrinking, CrossoverKind::balanced_uniform,
          CrossoverKind::alternating, CrossoverKind::counter_based, CrossoverKind::zero_length,
          CrossoverKind::map_of_ones, CrossoverKind::balanced_two_point,
          CrossoverKind::bitwise_and, CrossoverKind::bitwise_or}) {
        ops.push_back(CrossoverOp::make(kind));
    }
    return ops;
}

inline ClassificationReport classification_report(std::size_t n, std::uint64_t seed = 1,
                                                  std::vector<CrossoverOp> ops = {}) {
    if (ops.empty()) ops = standard_operator_set(n);
    ClassificationReport report;
    report.n = n;
    report.consistent_with_claims = true;
    report.implications_hold = true;

    for (const auto& op : ops) {
        OperatorReport row{op,
                           op.claimed_diversity_neutral(),
                           certify_diversity_neutral(op, n, seed),
                           certify_respectful(op, n, seed),
                           {},
                           {},
                           false};
        const bool enumerable = op.exact_enumerable() && n <= kCertifyExactLimit;
        if (enumerable) {
            row.unbiased = certify_unbiased(op, n);
            if (row.respectful.holds) row.oim = certify_oim(op, n);
        }
        row.matches_claim = row.neutral.holds == row.claimed_neutral;
        if (!row.matches_claim) report.consistent_with_claims = false;

        const auto violation = [&](const std::string& text) {
            report.implication_violations.push_back(op.spec_string() + ": " + text);
            report.implications_hold = false;
        };
        if (row.neutral.holds && !row.respectful.holds) {
            violation("diversity-neutral but not respectful");
        }
        if (row.respectful.holds && row.oim && row.oim->holds && !row.neutral.holds) {
            violation("respectful with OIM but not diversity-neutral");
        }
        if (row.respectful.holds && row.unbiased && row.unbiased->holds &&
            (!row.oim || !row.oim->holds)) {
            violation("respectful and unbiased but without OIM");
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace divlab
