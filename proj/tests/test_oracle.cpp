#include <catch2/catch_amalgamated.hpp>

#include "divlab/oracle.hpp"
#include "divlab/theory.hpp"

using namespace divlab;

namespace {

EngineConfig make_config(std::size_t mu, std::size_t n, const std::string& mutation,
                         const std::string& crossover = "", const std::string& pc = "1",
                         ParentSampling parents = ParentSampling::with_replacement,
                         TieBreaking tie = TieBreaking::prefer_offspring) {
    return EngineConfig{mu,
                        n,
                        MutationOp::parse(mutation, n),
                        crossover.empty() ? std::optional<CrossoverOp>{}
                                          : CrossoverOp::parse(crossover),
                        parse_rational(pc),
                        parents,
                        tie,
                        InitSpec::zero(),
                        1};
}

void check_drift_equals_formula(const EngineConfig& cfg) {
    const ExactStepModel model(cfg);
    const Rational chi = cfg.mutation.expected_flips_exact();
    for (const auto& pop : all_populations(cfg.mu, cfg.n)) {
        const Rational enumerated = model.expected_next_diversity(pop);
        const Rational formula =
            exact::predicted_drift(cfg.mu, cfg.n, chi, Rational(pop.diversity()), cfg.tie);
        INFO("mu=" << cfg.mu << " n=" << cfg.n << " S=" << pop.diversity());
        REQUIRE(enumerated == formula);
    }
}

} // namespace

TEST_CASE("population enumeration covers all multisets") {
    CHECK(all_populations(2, 2).size() == 10);   // C(5, 2)
    CHECK(all_populations(3, 2).size() == 20);   // C(6, 3)
    CHECK(all_populations(2, 3).size() == 36);   // C(9, 2)
    CHECK(all_populations(3, 4).size() == 816);  // C(18, 3)
}

TEST_CASE("complementary pair with one-bit flips drifts to 2") {
    const auto cfg = make_config(2, 2, "kflip:k=1");
    const Population p({BitString::from_string("00"), BitString::from_string("11")});
    CHECK(exact_one_step_drift(cfg, p) == Rational(2));
    // cross-check with (1 - delta) S + alpha at delta = 1, alpha = 2
    CHECK(exact::predicted_drift(2, 2, Rational(1), Rational(4)) == Rational(2));
}

TEST_CASE("monomorphic populations drift by exactly the additive coefficient") {
    for (std::size_t mu : {2ul, 3ul}) {
        for (const char* mutation : {"kflip:k=1", "sbm:p=1/2", "heavy:tau=2"}) {
            const auto cfg = make_config(mu, 3, mutation);
            const Population p = Population::monomorphic(mu, 3);
            const Rational alpha =
                exact::alpha_delta(mu, 3, cfg.mutation.expected_flips_exact()).alpha;
            INFO(mutation << " mu=" << mu);
            CHECK(exact_one_step_drift(cfg, p) == alpha);
        }
    }
}

TEST_CASE("mutation-only drift equals the closed form on a small grid") {
    for (std::size_t mu : {2ul, 3ul}) {
        for (std::size_t n : {2ul, 3ul}) {
            check_drift_equals_formula(make_config(mu, n, "kflip:k=1"));
            check_drift_equals_formula(make_config(mu, n, "sbm:p=1/4"));
            check_drift_equals_formula(make_config(mu, n, "heavy:tau=2"));
        }
    }
}

TEST_CASE("neutral crossovers leave the drift unchanged") {
    for (const char* crossover :
         {"uniform:c=1/2", "uniform:c=1", "kpoint:k=1", "boring", "balanced-uniform",
          "shrinking"}) {
        for (const char* pc : {"1/2", "1"}) {
            check_drift_equals_formula(make_config(2, 3, "sbm:p=1/4", crossover, pc));
        }
    }
    check_drift_equals_formula(make_config(3, 2, "kflip:k=1", "uniform:c=1/4", "1"));
}

TEST_CASE("boring crossover reduces the GA to the mutation-only scheme at any pc") {
    for (const char* pc : {"0", "1/3", "1"}) {
        const auto ga = make_config(3, 3, "sbm:p=1/4", "boring", pc);
        const auto plain = make_config(3, 3, "sbm:p=1/4");
        const ExactStepModel ga_model(ga);
        const ExactStepModel plain_model(plain);
        for (const auto& pop : all_populations(3, 3)) {
            REQUIRE(ga_model.expected_next_diversity(pop) ==
                    plain_model.expected_next_diversity(pop));
        }
    }
}

TEST_CASE("parent sampling without replacement gives the same drift") {
    check_drift_equals_formula(make_config(2, 3, "kflip:k=1", "uniform:c=1/2", "1",
                                           ParentSampling::without_replacement));
    check_drift_equals_formula(make_config(3, 2, "sbm:p=1/4", "boring", "1/2",
                                           ParentSampling::without_replacement));
}

TEST_CASE("uniform tie breaking scales the drift coefficients by mu/(mu+1)") {
    check_drift_equals_formula(make_config(2, 3, "kflip:k=1", "", "1",
                                           ParentSampling::with_replacement,
                                           TieBreaking::uniform_random));
    check_drift_equals_formula(make_config(3, 2, "sbm:p=1/4", "uniform:c=1/2", "1",
                                           ParentSampling::with_replacement,
                                           TieBreaking::uniform_random));
}

TEST_CASE("a non-neutral crossover breaks the closed form") {
    // For mu = 2 every respectful operator is drift-neutral (the offspring's
    // distances to the two parents always sum to their pair distance), so a
    // third population member is needed to expose the AND collapse.
    const auto cfg = make_config(3, 2, "sbm:p=1/4", "and");
    const Population p({BitString::from_string("01"), BitString::from_string("10"),
                        BitString::from_string("00")});
    const Rational enumerated = exact_one_step_drift(cfg, p);
    const Rational formula = exact::predicted_drift(
        3, 2, cfg.mutation.expected_flips_exact(), Rational(p.diversity()));
    CHECK(enumerated != formula);
    CHECK(enumerated < formula);  // AND collapses diversity

    // and with only the complementary pair, mu = 2 masks the effect exactly
    const auto pair_cfg = make_config(2, 2, "sbm:p=1/4", "and");
    const Population pair({BitString::from_string("01"), BitString::from_string("10")});
    CHECK(exact_one_step_drift(pair_cfg, pair) ==
          exact::predicted_drift(2, 2, pair_cfg.mutation.expected_flips_exact(),
                                 Rational(pair.diversity())));
}

TEST_CASE("enumeration reproduces the drift value 3.6 at mu=2, n=10, S=4") {
    const auto cfg = make_config(2, 10, "kflip:k=1");
    const ExactStepModel model(cfg, OracleLimits{10, 3});
    const Population p({BitString::from_string("0000000000"),
                        BitString::from_string("1100000000")});
    REQUIRE(p.diversity() == 4);
    const Rational drift = model.expected_next_diversity(p);
    CHECK(drift == Rational(18, 5));
    CHECK(drift == exact::predicted_drift(2, 10, Rational(1), Rational(4)));
}

TEST_CASE("capability limits") {
    CHECK_THROWS_AS(ExactStepModel(make_config(2, 5, "kflip:k=1")), CapabilityError);
    CHECK_THROWS_AS(ExactStepModel(make_config(4, 3, "kflip:k=1", "", "1")), CapabilityError);
    CHECK_THROWS_AS(ExactStepModel(make_config(2, 3, "kflip:k=1", "mapones")),
                    CapabilityError);
    CHECK_THROWS_AS(ExactStepModel(make_config(2, 3, "heavy:tau=1.5")), CapabilityError);

    // overriding the limits allows larger instances
    const ExactStepModel model(make_config(2, 5, "kflip:k=1"), OracleLimits{5, 3});
    const Population p = Population::monomorphic(2, 5);
    CHECK(model.expected_next_diversity(p) == Rational(2));
}

TEST_CASE("oracle rejects populations that do not match the config") {
    const ExactStepModel model(make_config(2, 3, "kflip:k=1"));
    CHECK_THROWS_AS(model.expected_next_diversity(Population::monomorphic(3, 3)), UsageError);
    CHECK_THROWS_AS(model.expected_next_diversity(Population::monomorphic(2, 2)), UsageError);
}
