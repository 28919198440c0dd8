#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/errors.hpp"
#include "divlab/mutation.hpp"
#include "divlab/rational.hpp"
#include "divlab/rng.hpp"

namespace divlab {

enum class CrossoverKind {
    uniform,
    k_point,
    boring,
    shrinking,
    balanced_uniform,
    alternating,
    counter_based,
    zero_length,
    map_of_ones,
    balanced_two_point,
    bitwise_and,
    bitwise_or,
};

/// Binary recombination operator. Immutable descriptor with a sampler and,
/// for most kinds, an exact output distribution at small n.
///
/// Semantics of the kinds:
///   uniform(c)          - each bit independently from x1 with probability c
///   k-point(k)          - k distinct cuts in the n-1 gaps, alternating parents
///   boring              - returns one parent uniformly at random
///   shrinking           - shrinks window [l, r] from [0, n) until both parents
///                         hold equally many ones inside, then swaps the window
///   balanced-uniform    - copies agreeing bits; spreads floor(k/2) ones
///                         uniformly over the k differing bits (odd k rounds
///                         up or down with probability 1/2 each)
///   alternating         - sorts the merged one-positions of both parents,
///                         keeps the odd-ranked entries of the first 2k*
///   counter-based       - bitwise uniform choice, stopping once the offspring
///                         holds ones(x1) ones or zeros(x1) zeros, then pads
///   zero-length         - run-length encoding; each offspring run drawn
///                         uniformly between the parents' corresponding runs
///   map-of-ones         - each one-index slot copied from a random parent's
///                         index map, duplicates repaired from x1's map
///   balanced-two-point  - two cuts u <= v on the index maps, middle from x2,
///                         rest from x1, duplicates repaired from x1's middle
///   and / or            - deterministic bitwise operations
class CrossoverOp {
public:
    static CrossoverOp uniform(const Rational& bias) {
        if (bias < 0 || bias > 1) throw UsageError("crossover bias must be in [0, 1]");
        CrossoverOp op(CrossoverKind::uniform);
        op.bias_ = bias;
        op.bias_dbl_ = to_double(bias);
        return op;
    }

    static CrossoverOp k_point(unsigned k) {
        if (k < 1) throw UsageError("cut count must be positive");
        CrossoverOp op(CrossoverKind::k_point);
        op.k_ = k;
        return op;
    }

    static CrossoverOp make(CrossoverKind kind) { return CrossoverOp(kind); }

    /// Parses the CLI operator notation, e.g. "uniform:c=1/2" or "kpoint:k=2".
    static CrossoverOp parse(std::string_view spec) {
        if (spec.starts_with("uniform:c=")) return uniform(parse_rational(spec.substr(10)));
        if (spec.starts_with("kpoint:k=")) {
            return k_point(static_cast<unsigned>(std::stoul(std::string(spec.substr(9)))));
        }
        if (spec == "boring") return make(CrossoverKind::boring);
        if (spec == "shrinking") return make(CrossoverKind::shrinking);
        if (spec == "balanced-uniform") return make(CrossoverKind::balanced_uniform);
        if (spec == "alternating") return make(CrossoverKind::alternating);
        if (spec == "counter") return make(CrossoverKind::counter_based);
        if (spec == "zerolen") return make(CrossoverKind::zero_length);
        if (spec == "mapones") return make(CrossoverKind::map_of_ones);
        if (spec == "balanced-2pt") return make(CrossoverKind::balanced_two_point);
        if (spec == "and") return make(CrossoverKind::bitwise_and);
        if (spec == "or") return make(CrossoverKind::bitwise_or);
        throw UsageError("unknown crossover spec '" + std::string(spec) + "'");
    }

    CrossoverKind kind() const { return kind_; }
    const Rational& bias() const { return bias_; }
    unsigned cuts() const { return k_; }

    std::string spec_string() const {
        switch (kind_) {
            case CrossoverKind::uniform: return "uniform:c=" + bias_.str();
            case CrossoverKind::k_point: return "kpoint:k=" + std::to_string(k_);
            case CrossoverKind::boring: return "boring";
            case CrossoverKind::shrinking: return "shrinking";
            case CrossoverKind::balanced_uniform: return "balanced-uniform";
            case CrossoverKind::alternating: return "alternating";
            case CrossoverKind::counter_based: return "counter";
            case CrossoverKind::zero_length: return "zerolen";
            case CrossoverKind::map_of_ones: return "mapones";
            case CrossoverKind::balanced_two_point: return "balanced-2pt";
            case CrossoverKind::bitwise_and: return "and";
            case CrossoverKind::bitwise_or: return "or";
        }
        return {};
    }

    /// Whether the operator leaves the diversity drift of the GA unchanged.
    bool claimed_diversity_neutral() const {
        switch (kind_) {
            case CrossoverKind::uniform:
            case CrossoverKind::k_point:
            case CrossoverKind::boring:
            case CrossoverKind::shrinking:
            case CrossoverKind::balanced_uniform:
                return true;
            default:
                return false;
        }
    }

    bool exact_enumerable() const {
        switch (kind_) {
            case CrossoverKind::zero_length:
            case CrossoverKind::map_of_ones:
            case CrossoverKind::balanced_two_point:
                return false;
            default:
                return true;
        }
    }

    BitString apply(const BitString& x1, const BitString& x2, Rng& rng) const {
        if (x1.size() != x2.size()) throw UsageError("parent length mismatch");
        const std::size_t n = x1.size();
        switch (kind_) {
            case CrossoverKind::uniform: {
                BitString y(n);
                for (std::size_t i = 0; i < n; ++i) {
                    y.set(i, rng.bernoulli(bias_dbl_) ? x1.test(i) : x2.test(i));
                }
                return y;
            }
            case CrossoverKind::k_point: {
                check_cuts(n);
                // Floyd's subset sampling over the n-1 gaps.
                std::set<std::size_t> cuts;
                for (std::size_t j = (n - 1) - k_; j < n - 1; ++j) {
                    const std::size_t t = static_cast<std::size_t>(rng.index(j + 1));
                    cuts.insert(cuts.count(t) ? j : t);
                }
                return apply_cut_set(x1, x2, cuts);
            }
            case CrossoverKind::boring:
                return rng.index(2) == 0 ? x1 : x2;
            case CrossoverKind::shrinking:
                return shrinking_offspring(x1, x2);
            case CrossoverKind::balanced_uniform: {
                const auto diff = (x1 ^ x2).one_positions();
                const std::size_t k = diff.size();
                if (k == 0) return x1;
                std::size_t m = k / 2;
                if (k % 2 == 1 && rng.index(2) == 1) ++m;
                BitString y = x1 & x2;  // agreeing ones survive, differing bits zeroed
                std::set<std::size_t> chosen;
                for (std::size_t j = k - m; j < k; ++j) {
                    const std::size_t t = static_cast<std::size_t>(rng.index(j + 1));
                    chosen.insert(chosen.count(t) ? j : t);
                }
                for (const std::size_t idx : chosen) y.set(diff[idx], true);
                return y;
            }
            case CrossoverKind::alternating:
                return alternating_offspring(x1, x2);
            case CrossoverKind::counter_based: {
                const std::size_t ones_target = x1.count_ones();
                const std::size_t zeros_target = n - ones_target;
                BitString y(n);
                std::size_t ones = 0, zeros = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (ones == ones_target) break;  // rest stays zero
                    if (zeros == zeros_target) {
                        for (std::size_t j = i; j < n; ++j) y.set(j, true);
                        break;
                    }
                    bool bit = x1.test(i);
                    if (x1.test(i) != x2.test(i)) {
                        bit = rng.index(2) == 0 ? x1.test(i) : x2.test(i);
                    }
                    y.set(i, bit);
                    bit ? ++ones : ++zeros;
                }
                return y;
            }
            case CrossoverKind::zero_length: {
                const auto v1 = zero_runs(x1);
                const auto v2 = zero_runs(x2);
                const std::size_t stars = std::min(v1.size(), v2.size());
                BitString y(n);
                std::size_t pos = 0;
                for (std::size_t j = 0; j < stars && pos <= n; ++j) {
                    const auto [lo, hi] = std::minmax(v1[j], v2[j]);
                    pos += lo + static_cast<std::size_t>(rng.index(hi - lo + 1));
                    if (j + 1 < stars && pos < n) y.set(pos, true);  // last entry is the tail run
                    ++pos;
                }
                return y;
            }
            case CrossoverKind::map_of_ones: {
                const auto m1 = x1.one_positions();
                const auto m2 = x2.one_positions();
                const std::size_t slots = std::min(m1.size(), m2.size());
                std::set<std::size_t> chosen;
                for (std::size_t j = 0; j < slots; ++j) {
                    chosen.insert(rng.index(2) == 0 ? m1[j] : m2[j]);
                }
                std::vector<std::size_t> unused;
                for (const std::size_t p : m1) {
                    if (!chosen.count(p)) unused.push_back(p);
                }
                while (chosen.size() < slots) {
                    const std::size_t u = static_cast<std::size_t>(rng.index(unused.size()));
                    chosen.insert(unused[u]);
                    unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(u));
                }
                BitString y(n);
                for (const std::size_t p : chosen) y.set(p, true);
                return y;
            }
            case CrossoverKind::balanced_two_point: {
                const auto m1 = x1.one_positions();
                const auto m2 = x2.one_positions();
                if (m1.empty()) return BitString(n);
                std::size_t u = static_cast<std::size_t>(rng.index(m1.size()));
                std::size_t v = static_cast<std::size_t>(rng.index(m1.size()));
                if (u > v) std::swap(u, v);
                std::set<std::size_t> chosen;
                for (std::size_t j = 0; j < u; ++j) chosen.insert(m1[j]);
                for (std::size_t j = u; j <= v && j < m2.size(); ++j) chosen.insert(m2[j]);
                for (std::size_t j = v + 1; j < m1.size(); ++j) chosen.insert(m1[j]);
                for (std::size_t j = u; j <= v && chosen.size() < m1.size(); ++j) {
                    chosen.insert(m1[j]);
                }
                BitString y(n);
                for (const std::size_t p : chosen) y.set(p, true);
                return y;
            }
            case CrossoverKind::bitwise_and:
                return x1 & x2;
            case CrossoverKind::bitwise_or:
                return x1 | x2;
        }
        return x1;
    }

    /// Exact output distribution; throws CapabilityError for the kinds whose
    /// internal randomness is not enumerated (zero-length, map-of-ones,
    /// balanced-two-point) so callers can fall back to Monte Carlo.
    std::map<BitString, Rational> exact_distribution(
        const BitString& x1, const BitString& x2,
        std::size_t limit = kExactEnumerationLimit) const {
        if (x1.size() != x2.size()) throw UsageError("parent length mismatch");
        const std::size_t n = x1.size();
        if (n > limit) {
            throw CapabilityError("exact crossover distribution limited to n <= " +
                                  std::to_string(limit));
        }
        if (!exact_enumerable()) {
            throw CapabilityError("crossover '" + spec_string() + "' is not exactly enumerable");
        }
        std::map<BitString, Rational> dist;
        switch (kind_) {
            case CrossoverKind::uniform: {
                const auto diff = (x1 ^ x2).one_positions();
                const std::size_t k = diff.size();
                for (std::uint64_t m = 0; m < (1ULL << k); ++m) {
                    BitString y = x2;
                    Rational w = 1;
                    for (std::size_t j = 0; j < k; ++j) {
                        if ((m >> j) & 1ULL) {
                            y.set(diff[j], x1.test(diff[j]));
                            w *= bias_;
                        } else {
                            w *= 1 - bias_;
                        }
                    }
                    if (w != 0) dist[y] += w;
                }
                break;
            }
            case CrossoverKind::k_point: {
                check_cuts(n);
                const Rational w(1, MutationOp::binomial(n - 1, k_));
                for (std::uint64_t m = 0; m < (1ULL << (n - 1)); ++m) {
                    if (std::popcount(m) != static_cast<int>(k_)) continue;
                    std::set<std::size_t> cuts;
                    for (std::size_t g = 0; g < n - 1; ++g) {
                        if ((m >> g) & 1ULL) cuts.insert(g);
                    }
                    dist[apply_cut_set(x1, x2, cuts)] += w;
                }
                break;
            }
            case CrossoverKind::boring:
                dist[x1] += Rational(1, 2);
                dist[x2] += Rational(1, 2);
                break;
            case CrossoverKind::shrinking:
                dist[shrinking_offspring(x1, x2)] = 1;
                break;
            case CrossoverKind::balanced_uniform: {
                const auto diff = (x1 ^ x2).one_positions();
                const std::size_t k = diff.size();
                if (k == 0) {
                    dist[x1] = 1;
                    break;
                }
                const BitString base = x1 & x2;
                std::vector<std::size_t> counts{k / 2};
                if (k % 2 == 1) counts.push_back(k / 2 + 1);
                const Rational split(1, counts.size());
                for (const std::size_t m : counts) {
                    const Rational w = split / Rational(MutationOp::binomial(k, m));
                    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
                        if (std::popcount(mask) != static_cast<int>(m)) continue;
                        BitString y = base;
                        for (std::size_t j = 0; j < k; ++j) {
                            if ((mask >> j) & 1ULL) y.set(diff[j], true);
                        }
                        dist[y] += w;
                    }
                }
                break;
            }
            case CrossoverKind::alternating:
                dist[alternating_offspring(x1, x2)] = 1;
                break;
            case CrossoverKind::counter_based: {
                const std::size_t ones_target = x1.count_ones();
                const std::size_t zeros_target = n - ones_target;
                // Depth-first enumeration of the coin decisions.
                const std::function<void(std::size_t, std::size_t, std::size_t, BitString,
                                         Rational)>
                    walk = [&](std::size_t i, std::size_t ones, std::size_t zeros, BitString y,
                               Rational w) {
                        while (i < n) {
                            if (ones == ones_target) break;
                            if (zeros == zeros_target) {
                                for (std::size_t j = i; j < n; ++j) y.set(j, true);
                                break;
                            }
                            if (x1.test(i) != x2.test(i)) {
                                BitString with_one = y;
                                with_one.set(i, true);
                                walk(i + 1, ones + 1, zeros, std::move(with_one), w / 2);
                                w /= 2;
                                ++zeros;
                            } else if (x1.test(i)) {
                                y.set(i, true);
                                ++ones;
                            } else {
                                ++zeros;
                            }
                            ++i;
                        }
                        dist[y] += w;
                    };
                walk(0, 0, 0, BitString(n), 1);
                break;
            }
            case CrossoverKind::bitwise_and:
                dist[x1 & x2] = 1;
                break;
            case CrossoverKind::bitwise_or:
                dist[x1 | x2] = 1;
                break;
            default:
                break;  // unreachable; handled by exact_enumerable() above
        }
        return dist;
    }

private:
    explicit CrossoverOp(CrossoverKind kind) : kind_(kind) {}

    void check_cuts(std::size_t n) const {
        if (k_ > n - 1) {
            throw UsageError("k-point crossover needs k <= n-1 (k=" + std::to_string(k_) +
                             ", n=" + std::to_string(n) + ")");
        }
    }

    /// Mask from cut gaps: the segment before the first cut comes from x1.
    /// Gap g separates positions g and g+1.
    static BitString apply_cut_set(const BitString& x1, const BitString& x2,
                                   const std::set<std::size_t>& cuts) {
        const std::size_t n = x1.size();
        BitString y(n);
        bool from_first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && cuts.count(i - 1)) from_first = !from_first;
            y.set(i, from_first ? x1.test(i) : x2.test(i));
        }
        return y;
    }

    /// Alternates shrinking the right then the left border until both
    /// parents hold equally many ones inside [l, r]; the empty window always
    /// qualifies. The window then takes x2's bits, the rest x1's.
    static BitString shrinking_offspring(const BitString& x1, const BitString& x2) {
        const std::size_t n = x1.size();
        std::ptrdiff_t l = 0;
        std::ptrdiff_t r = static_cast<std::ptrdiff_t>(n) - 1;
        std::size_t o1 = x1.count_ones();
        std::size_t o2 = x2.count_ones();
        bool shrink_right = true;
        while (o1 != o2) {
            if (shrink_right) {
                o1 -= x1.test(static_cast<std::size_t>(r));
                o2 -= x2.test(static_cast<std::size_t>(r));
                --r;
            } else {
                o1 -= x1.test(static_cast<std::size_t>(l));
                o2 -= x2.test(static_cast<std::size_t>(l));
                ++l;
            }
            shrink_right = !shrink_right;
        }
        BitString y = x1;
        for (std::ptrdiff_t i = l; i <= r; ++i) {
            y.set(static_cast<std::size_t>(i), x2.test(static_cast<std::size_t>(i)));
        }
        return y;
    }

    static BitString alternating_offspring(const BitString& x1, const BitString& x2) {
        const auto p1 = x1.one_positions();
        const auto p2 = x2.one_positions();
        const std::size_t stars = std::min(p1.size(), p2.size());
        std::vector<std::size_t> merged;
        merged.reserve(p1.size() + p2.size());
        std::merge(p1.begin(), p1.end(), p2.begin(), p2.end(), std::back_inserter(merged));
        BitString y(x1.size());
        for (std::size_t j = 0; j + 1 < 2 * stars + 1; j += 2) y.set(merged[j], true);
        return y;
    }

    /// Run-length encoding [a_1, ..., a_{k+1}]: zeros before each one and
    /// the trailing zeros.
    static std::vector<std::size_t> zero_runs(const BitString& x) {
        std::vector<std::size_t> runs;
        std::size_t current = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x.test(i)) {
                runs.push_back(current);
                current = 0;
            } else {
                ++current;
            }
        }
        runs.push_back(current);
        return runs;
    }

    CrossoverKind kind_;
    Rational bias_ = 0;
    double bias_dbl_ = 0;
    unsigned k_ = 0;
};

} // namespace divlab
