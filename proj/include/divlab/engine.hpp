#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "divlab/bitstring.hpp"
#include "divlab/crossover.hpp"
#include "divlab/errors.hpp"
#include "divlab/mutation.hpp"
#include "divlab/population.hpp"
#include "divlab/rational.hpp"
#include "divlab/rng.hpp"
#include "divlab/theory.hpp"
#include "divlab/trajectory.hpp"

namespace divlab {

enum class ParentSampling { with_replacement, without_replacement };

struct InitSpec {
    enum class Kind { monomorphic_zero, max_diversity, uniform_random, explicit_list };

    Kind kind = Kind::monomorphic_zero;
    std::vector<BitString> members;  // explicit_list only

    static InitSpec zero() { return {}; }
    static InitSpec maxdiv() { return {Kind::max_diversity, {}}; }
    static InitSpec random() { return {Kind::uniform_random, {}}; }
    static InitSpec explicit_list(std::vector<BitString> members) {
        return {Kind::explicit_list, std::move(members)};
    }

    std::string name() const {
        switch (kind) {
            case Kind::monomorphic_zero: return "zero";
            case Kind::max_diversity: return "maxdiv";
            case Kind::uniform_random: return "random";
            case Kind::explicit_list: return "explicit";
        }
        return {};
    }
};

/// Full description of one steady-state run on the flat fitness function.
/// No fitness evaluations happen anywhere: survivor selection degenerates to
/// the configured replacement policy.
struct EngineConfig {
    std::size_t mu = 2;
    std::size_t n = 1;
    MutationOp mutation;
    std::optional<CrossoverOp> crossover;
    Rational crossover_prob = 1;  // applies only when crossover is set
    ParentSampling parents = ParentSampling::with_replacement;
    TieBreaking tie = TieBreaking::prefer_offspring;
    InitSpec init;
    std::uint64_t seed = 0;

    void validate() const {
        if (mu < 2) throw UsageError("population size must be at least 2");
        if (n < 1) throw UsageError("genome length must be positive");
        if (mutation.genome_length() != n) {
            throw UsageError("mutation operator length differs from configured n");
        }
        if (crossover_prob < 0 || crossover_prob > 1) {
            throw UsageError("crossover probability must be in [0, 1]");
        }
        if (init.kind == InitSpec::Kind::explicit_list) {
            if (init.members.size() != mu) {
                throw UsageError("explicit initial population must have mu members");
            }
            for (const auto& m : init.members) {
                if (m.size() != n) throw UsageError("initial member length differs from n");
            }
        }
    }

    std::vector<std::pair<std::string, std::string>> describe() const {
        std::vector<std::pair<std::string, std::string>> kv;
        kv.emplace_back("mu", std::to_string(mu));
        kv.emplace_back("n", std::to_string(n));
        kv.emplace_back("mutation", mutation.spec_string());
        kv.emplace_back("crossover", crossover ? crossover->spec_string() : "none");
        kv.emplace_back("pc", crossover_prob.str());
        kv.emplace_back("parents",
                        parents == ParentSampling::with_replacement ? "with" : "without");
        kv.emplace_back("tie", tie == TieBreaking::prefer_offspring ? "prefer" : "uniform");
        std::string init_desc = init.name();
        if (init.kind == InitSpec::Kind::explicit_list) {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (const auto& m : init.members) {
                for (const unsigned char c : m.to_string()) {
                    h ^= c;
                    h *= 0x100000001B3ULL;
                }
                h ^= ';';
                h *= 0x100000001B3ULL;
            }
            std::ostringstream os;
            os << std::hex << h;
            init_desc += ":" + os.str();
        }
        kv.emplace_back("init", init_desc);
        kv.emplace_back("seed", std::to_string(seed));
        return kv;
    }

    /// FNV-1a hash of the canonical description; identifies a run in outputs.
    std::string fingerprint() const {
        std::string canonical;
        for (const auto& [k, v] : describe()) canonical += k + '=' + v + ';';
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (const unsigned char c : canonical) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        std::ostringstream os;
        os << std::hex << h;
        return os.str();
    }

    TheoryParams theory_params(double eps = 1.0) const {
        return TheoryParams{mu, n, mutation.expected_flips(), eps, tie};
    }
};

struct StepOutcome {
    BitString offspring;
    std::size_t removed_index;  ///< meaningful only when accepted
    bool accepted;              ///< false only for idle uniform-tie steps
    std::uint64_t diversity_after;
};

inline Population initial_population(const EngineConfig& cfg, Rng& rng) {
    switch (cfg.init.kind) {
        case InitSpec::Kind::monomorphic_zero: return Population::monomorphic(cfg.mu, cfg.n);
        case InitSpec::Kind::max_diversity: return Population::max_diversity(cfg.mu, cfg.n);
        case InitSpec::Kind::uniform_random: return Population::uniform_random(cfg.mu, cfg.n, rng);
        case InitSpec::Kind::explicit_list: return Population(cfg.init.members);
    }
    throw UsageError("unknown init kind");
}

/// One generation. Samples parent(s), applies crossover with probability pc
/// (boring crossover otherwise) when configured, mutates, and replaces per
/// the tie-breaking policy. Every step is checked against the one-step
/// change bound |S' - S| <= 2(mu-1)n; a violation aborts the run since it
/// can only come from a defective operator implementation.
inline StepOutcome step(const EngineConfig& cfg, Population& pop, Rng& rng) {
    const std::uint64_t before = pop.diversity();

    BitString pre_mutation(cfg.n);
    if (cfg.crossover) {
        std::size_t i = static_cast<std::size_t>(rng.index(cfg.mu));
        std::size_t j;
        if (cfg.parents == ParentSampling::without_replacement) {
            j = static_cast<std::size_t>(rng.index(cfg.mu - 1));
            if (j >= i) ++j;
        } else {
            j = static_cast<std::size_t>(rng.index(cfg.mu));
        }
        const bool recombine = cfg.crossover_prob == 1 ||
                               rng.real01() < to_double(cfg.crossover_prob);
        if (recombine) {
            pre_mutation = cfg.crossover->apply(pop.member(i), pop.member(j), rng);
        } else {
            pre_mutation = rng.index(2) == 0 ? pop.member(i) : pop.member(j);
        }
    } else {
        pre_mutation = pop.member(static_cast<std::size_t>(rng.index(cfg.mu)));
    }
    BitString offspring = cfg.mutation.mutate(pre_mutation, rng);

    StepOutcome out{std::move(offspring), 0, true, 0};
    if (cfg.tie == TieBreaking::prefer_offspring) {
        out.removed_index = static_cast<std::size_t>(rng.index(cfg.mu));
        pop.replace(out.removed_index, out.offspring);
    } else {
        // Uniform tie breaking: the offspring joins a pool of mu+1 and a
        // uniform pool member is discarded; discarding the offspring itself
        // is an idle step.
        const std::size_t discard = static_cast<std::size_t>(rng.index(cfg.mu + 1));
        if (discard == cfg.mu) {
            out.accepted = false;
        } else {
            out.removed_index = discard;
            pop.replace(discard, out.offspring);
        }
    }
    out.diversity_after = pop.diversity();

    const std::uint64_t after = out.diversity_after;
    const std::uint64_t change = after > before ? after - before : before - after;
    if (change > max_step_change(cfg.mu, cfg.n)) {
        throw std::logic_error("one-step diversity change exceeded 2(mu-1)n");
    }
    return out;
}

/// Runs `steps` generations from the configured initial population and
/// records (t, S) every `stride` steps (the final state is always recorded).
/// Fully deterministic given the config, including its seed.
inline TrajectoryRecord run(const EngineConfig& cfg, std::uint64_t steps,
                            std::uint64_t stride = 1) {
    cfg.validate();
    if (stride == 0) throw UsageError("sampling stride must be positive");
    Rng rng(cfg.seed);
    Population pop = initial_population(cfg, rng);

    TrajectoryRecord record;
    record.fingerprint = cfg.fingerprint();
    for (const auto& [k, v] : cfg.describe()) record.config_lines.push_back(k + '=' + v);
    record.config_lines.push_back("steps=" + std::to_string(steps));
    record.config_lines.push_back("stride=" + std::to_string(stride));

    const std::uint64_t cap = max_diversity_value(cfg.mu, cfg.n);
    record.append(0, pop.diversity(), cap);
    for (std::uint64_t t = 1; t <= steps; ++t) {
        step(cfg, pop, rng);
        if (t % stride == 0 || t == steps) record.append(t, pop.diversity(), cap);
    }
    return record;
}

} // namespace divlab
