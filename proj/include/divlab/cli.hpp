#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "divlab/certify.hpp"
#include "divlab/engine.hpp"
#include "divlab/experiments.hpp"
#include "divlab/oracle.hpp"
#include "divlab/theory.hpp"

namespace divlab::cli {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json config_json(const EngineConfig& cfg) {
    Json j;
    for (const auto& [k, v] : cfg.describe()) j[k] = v;
    j["fingerprint"] = cfg.fingerprint();
    return j;
}

inline Json verdict_json(const Verdict& v) {
    Json j;
    j["property"] = property_name(v.property);
    j["holds"] = v.holds;
    j["mode"] = v.mode == CertMode::exact ? "exact" : "statistical";
    if (v.witness) {
        Json w;
        w["x1"] = v.witness->x1.to_string();
        w["x2"] = v.witness->x2.to_string();
        if (v.witness->z) w["z"] = v.witness->z->to_string();
        if (v.witness->offspring) w["offspring"] = v.witness->offspring->to_string();
        if (!v.witness->measured.empty()) w["measured"] = v.witness->measured;
        if (!v.witness->expected.empty()) w["expected"] = v.witness->expected;
        if (!v.witness->note.empty()) w["note"] = v.witness->note;
        j["witness"] = w;
    }
    if (v.stats) {
        j["stats"] = Json{{"seed", v.stats->seed},
                          {"cases", v.stats->cases},
                          {"samples_per_case", v.stats->samples_per_case},
                          {"sigma_threshold", v.stats->sigma_threshold}};
    }
    return j;
}

inline void emit(const Json& j, const std::string& out_path, std::ostream& fallback) {
    if (out_path.empty()) {
        fallback << j.dump(2) << '\n';
    } else {
        std::ofstream f(out_path);
        if (!f) throw UsageError("cannot open output file '" + out_path + "'");
        f << j.dump(2) << '\n';
    }
}

inline std::string verdict_cell(const Verdict& v) {
    std::string s = v.holds ? "holds" : "fails";
    if (v.mode == CertMode::statistical) s += "*";
    return s;
}

struct CommonFlags {
    std::size_t mu = 2;
    std::size_t n = 10;
    std::string mutation = "kflip:k=1";
    std::string crossover;
    std::string pc = "1";
    std::string tie = "prefer";
    std::string parents = "with";
    std::string init = "zero";
    std::uint64_t seed = 1;
    std::string out;
    std::string format;

    void attach(CLI::App* cmd, bool with_operators = true) {
        cmd->add_option("--mu", mu, "population size (>= 2)");
        cmd->add_option("--n", n, "genome length");
        if (with_operators) {
            cmd->add_option("--mutation", mutation,
                            "mutation spec: sbm:p=<r> | kflip:k=<int> | heavy:tau=<real>");
            cmd->add_option("--crossover", crossover,
                            "crossover spec (uniform:c=, kpoint:k=, boring, shrinking, "
                            "balanced-uniform, alternating, counter, zerolen, mapones, "
                            "balanced-2pt, and, or)");
            cmd->add_option("--pc", pc, "crossover probability (rational), default 1");
            cmd->add_option("--tie", tie, "tie breaking: prefer | uniform")
                ->check(CLI::IsMember({"prefer", "uniform"}));
            cmd->add_option("--parents", parents, "parent sampling: with | without")
                ->check(CLI::IsMember({"with", "without"}));
            cmd->add_option("--init", init, "initial population: zero | maxdiv | random")
                ->check(CLI::IsMember({"zero", "maxdiv", "random"}));
        }
        cmd->add_option("--seed", seed, "base seed");
        cmd->add_option("--out", out, "output file (default: stdout)");
        cmd->add_option("--format", format, "output format: csv | json | text")
            ->check(CLI::IsMember({"csv", "json", "text"}));
    }

    EngineConfig engine_config() const {
        EngineConfig cfg{mu,
                         n,
                         MutationOp::parse(mutation, n),
                         crossover.empty() ? std::optional<CrossoverOp>{}
                                           : CrossoverOp::parse(crossover),
                         parse_rational(pc),
                         parents == "with" ? ParentSampling::with_replacement
                                           : ParentSampling::without_replacement,
                         tie == "prefer" ? TieBreaking::prefer_offspring
                                         : TieBreaking::uniform_random,
                         init_spec(),
                         seed};
        cfg.validate();
        return cfg;
    }

    InitSpec init_spec() const {
        if (init == "zero") return InitSpec::zero();
        if (init == "maxdiv") return InitSpec::maxdiv();
        if (init == "random") return InitSpec::random();
        throw UsageError("unknown init '" + init + "'");
    }
};

inline unsigned default_jobs() {
    if (const char* env = std::getenv("DIVLAB_JOBS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

inline Json drift_result_json(const EngineConfig& cfg, const DriftCheckResult& r) {
    Json j;
    j["config"] = config_json(cfg);
    j["s_start"] = r.s_start;
    j["predicted"] = r.predicted;
    j["empirical"] = r.empirical;
    j["se"] = r.se;
    j["trials"] = r.trials;
    j["sigma"] = r.sigma;
    j["pass"] = r.pass;
    return j;
}

} // namespace detail

/// Parses and dispatches one invocation. Returns the process exit status:
/// 0 success, 1 theory contradiction or failed check, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"divlab - diversity dynamics laboratory for steady-state (mu+1) algorithms"};
    app.require_subcommand(1);
    unsigned jobs = detail::default_jobs();
    app.add_option("--jobs", jobs, "worker threads for trial campaigns");

    int exit_code = 0;

    // predict -----------------------------------------------------------
    auto predict_flags = std::make_shared<detail::CommonFlags>();
    auto predict_eps = std::make_shared<double>(1.0);
    auto* predict = app.add_subcommand("predict", "closed-form drift/equilibrium predictions");
    predict_flags->attach(predict);
    predict->add_option("--eps", *predict_eps, "epsilon in (0, 1]");
    predict->callback([&, predict_flags, predict_eps] {
        const auto mutation =
            MutationOp::parse(predict_flags->mutation, predict_flags->n);
        const TheoryParams params{predict_flags->mu, predict_flags->n,
                                  mutation.expected_flips(), *predict_eps,
                                  predict_flags->tie == "prefer"
                                      ? TieBreaking::prefer_offspring
                                      : TieBreaking::uniform_random};
        const auto [alpha, delta] = alpha_delta(params);
        const auto bounds = hitting_time_bounds(params);
        Json j;
        j["alpha"] = alpha;
        j["delta"] = delta;
        j["s0"] = alpha / delta;
        j["down_bound"] = bounds.down;
        j["up_bound"] = bounds.up;
        j["non_skip"] = non_skip_condition(params);
        if (predict_flags->format == "json") {
            detail::emit(j, predict_flags->out, out);
        } else {
            std::ostringstream text;
            text << std::setprecision(12);
            text << std::left << std::setw(12) << "alpha" << alpha << '\n'
                 << std::left << std::setw(12) << "delta" << delta << '\n'
                 << std::left << std::setw(12) << "s0" << alpha / delta << '\n'
                 << std::left << std::setw(12) << "down_bound" << bounds.down << '\n'
                 << std::left << std::setw(12) << "up_bound" << bounds.up << '\n'
                 << std::left << std::setw(12) << "non_skip"
                 << (non_skip_condition(params) ? "true" : "false") << '\n';
            if (predict_flags->out.empty()) {
                out << text.str();
            } else {
                std::ofstream f(predict_flags->out);
                if (!f) throw UsageError("cannot open output file '" + predict_flags->out + "'");
                f << text.str();
            }
        }
    });

    // simulate ----------------------------------------------------------
    auto sim_flags = std::make_shared<detail::CommonFlags>();
    auto sim_steps = std::make_shared<std::uint64_t>(1000);
    auto sim_stride = std::make_shared<std::uint64_t>(1);
    auto* simulate = app.add_subcommand("simulate", "run one trajectory, write t,S as CSV");
    sim_flags->attach(simulate);
    simulate->add_option("--steps", *sim_steps, "generations to run");
    simulate->add_option("--stride", *sim_stride, "sampling stride");
    simulate->callback([&, sim_flags, sim_steps, sim_stride] {
        const auto record = divlab::run(sim_flags->engine_config(), *sim_steps, *sim_stride);
        if (sim_flags->out.empty()) {
            record.write_csv(out);
        } else {
            std::ofstream f(sim_flags->out);
            if (!f) throw UsageError("cannot open output file '" + sim_flags->out + "'");
            record.write_csv(f);
        }
    });

    // drift-check ---------------------------------------------------------
    auto drift_flags = std::make_shared<detail::CommonFlags>();
    auto drift_trials = std::make_shared<std::uint64_t>(10000);
    auto* drift = app.add_subcommand("drift-check",
                                     "Monte Carlo one-step drift versus prediction");
    drift_flags->attach(drift);
    drift->add_option("--trials", *drift_trials, "independent single-step trials");
    drift->callback([&, drift_flags, drift_trials] {
        const EngineConfig cfg = drift_flags->engine_config();
        Rng rng(cfg.seed);
        const Population start = initial_population(cfg, rng);
        const auto result = drift_check(cfg, start, *drift_trials, 4.0, jobs);
        detail::emit(detail::drift_result_json(cfg, result), drift_flags->out, out);
        err << "drift-check: S=" << result.s_start << " predicted=" << result.predicted
            << " empirical=" << result.empirical << " se=" << result.se << " -> "
            << (result.pass ? "pass" : "FAIL") << '\n';
        if (!result.pass) exit_code = 1;
    });

    // equilibrium ---------------------------------------------------------
    auto eq_flags = std::make_shared<detail::CommonFlags>();
    auto eq_burnin = std::make_shared<std::uint64_t>(100000);
    auto eq_window = std::make_shared<std::uint64_t>(1000000);
    auto eq_tol = std::make_shared<double>(0.02);
    auto* equilibrium_cmd =
        app.add_subcommand("equilibrium", "time-averaged diversity versus the equilibrium");
    eq_flags->attach(equilibrium_cmd);
    equilibrium_cmd->add_option("--burnin", *eq_burnin, "steps discarded before averaging");
    equilibrium_cmd->add_option("--window", *eq_window, "averaging window length");
    equilibrium_cmd->add_option("--tol", *eq_tol, "relative error tolerance");
    equilibrium_cmd->callback([&, eq_flags, eq_burnin, eq_window, eq_tol] {
        const EngineConfig cfg = eq_flags->engine_config();
        const auto result = equilibrium_check(cfg, *eq_burnin, *eq_window);
        if (result.burn_in_warning) {
            err << "warning: burn-in " << result.burn_in
                << " is below the approach-time bound; the average may be biased\n";
        }
        const bool pass = result.relative_error <= *eq_tol;
        Json j;
        j["config"] = detail::config_json(cfg);
        j["burn_in"] = result.burn_in;
        j["window"] = result.window;
        j["predicted"] = result.equilibrium;
        j["empirical"] = result.time_averaged;
        j["relative_error"] = result.relative_error;
        j["tolerance"] = *eq_tol;
        j["pass"] = pass;
        detail::emit(j, eq_flags->out, out);
        err << "equilibrium: S0=" << result.equilibrium << " averaged=" << result.time_averaged
            << " rel_err=" << result.relative_error << " -> " << (pass ? "pass" : "FAIL")
            << '\n';
        if (!pass) exit_code = 1;
    });

    // hitting-time --------------------------------------------------------
    auto hit_flags = std::make_shared<detail::CommonFlags>();
    auto hit_eps = std::make_shared<double>(0.5);
    auto hit_trials = std::make_shared<std::uint64_t>(200);
    auto hit_direction = std::make_shared<std::string>("down");
    auto* hitting = app.add_subcommand("hitting-time",
                                       "empirical equilibrium approach times versus bounds");
    hit_flags->attach(hitting);
    hitting->add_option("--eps", *hit_eps, "epsilon in (0, 1]");
    auto* dir_opt = hitting->add_option("--direction", *hit_direction, "down | up")
                        ->check(CLI::IsMember({"down", "up"}));
    (void)dir_opt;
    hitting->add_option("--trials", *hit_trials, "independent trials");
    auto* hit_init_opt = hitting->get_option("--init");
    hitting->callback([&, hit_flags, hit_eps, hit_trials, hit_direction, hit_init_opt] {
        EngineConfig cfg = hit_flags->engine_config();
        const auto direction = *hit_direction == "down" ? HittingDirection::down
                                                        : HittingDirection::up;
        if (direction == HittingDirection::down && hit_init_opt->count() == 0) {
            cfg.init = InitSpec::maxdiv();
            err << "notice: down-direction run starts from the max-diversity population\n";
        }
        const auto result = hitting_time_experiment(cfg, *hit_eps, direction, *hit_trials, jobs);
        Json j;
        j["config"] = detail::config_json(cfg);
        j["direction"] = *hit_direction;
        j["eps"] = *hit_eps;
        j["s0"] = result.equilibrium;
        j["threshold"] = result.threshold;
        j["predicted"] = result.bound;
        j["empirical"] = result.mean_time;
        j["se"] = result.se;
        j["trials"] = result.trials;
        j["capped"] = result.capped;
        j["landed_inside"] = result.landed_inside;
        j["status"] = result.status == ExperimentStatus::pass
                          ? "pass"
                          : (result.status == ExperimentStatus::fail ? "fail" : "inconclusive");
        j["pass"] = result.status == ExperimentStatus::pass;
        detail::emit(j, hit_flags->out, out);
        err << "hitting-time(" << *hit_direction << "): mean=" << result.mean_time
            << " bound=" << result.bound << " capped=" << result.capped << "/" << result.trials
            << '\n';
        if (result.status == ExperimentStatus::fail) exit_code = 1;
    });

    // classify ------------------------------------------------------------
    auto cls_n = std::make_shared<std::size_t>(3);
    auto cls_seed = std::make_shared<std::uint64_t>(1);
    auto cls_out = std::make_shared<std::string>();
    auto cls_format = std::make_shared<std::string>("text");
    auto* classify = app.add_subcommand("classify",
                                        "certify operator properties and compare with the "
                                        "documented classification");
    classify->add_option("--n", *cls_n, "genome length for certification (exact up to 3)");
    classify->add_option("--seed", *cls_seed, "seed for statistical fallbacks");
    classify->add_option("--out", *cls_out, "output file");
    classify->add_option("--format", *cls_format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));
    classify->callback([&, cls_n, cls_seed, cls_out, cls_format] {
        const auto report = classification_report(*cls_n, *cls_seed);
        if (*cls_format == "json") {
            Json j;
            j["n"] = report.n;
            Json rows = Json::array();
            for (const auto& row : report.rows) {
                Json r;
                r["operator"] = row.op.spec_string();
                r["claimed_diversity_neutral"] = row.claimed_neutral;
                r["diversity_neutral"] = detail::verdict_json(row.neutral);
                r["respectful"] = detail::verdict_json(row.respectful);
                if (row.oim) r["oim"] = detail::verdict_json(*row.oim);
                if (row.unbiased) r["unbiased"] = detail::verdict_json(*row.unbiased);
                r["matches_claim"] = row.matches_claim;
                rows.push_back(r);
            }
            j["rows"] = rows;
            j["implication_violations"] = report.implication_violations;
            j["consistent_with_claims"] = report.consistent_with_claims;
            j["implications_hold"] = report.implications_hold;
            detail::emit(j, *cls_out, out);
        } else {
            std::ostringstream text;
            text << std::left << std::setw(18) << "operator" << std::setw(9) << "claimed"
                 << std::setw(10) << "neutral" << std::setw(12) << "respectful" << std::setw(8)
                 << "oim" << std::setw(10) << "unbiased" << '\n';
            for (const auto& row : report.rows) {
                text << std::left << std::setw(18) << row.op.spec_string() << std::setw(9)
                     << (row.claimed_neutral ? "neutral" : "not") << std::setw(10)
                     << detail::verdict_cell(row.neutral) << std::setw(12)
                     << detail::verdict_cell(row.respectful) << std::setw(8)
                     << (row.oim ? detail::verdict_cell(*row.oim) : "-") << std::setw(10)
                     << (row.unbiased ? detail::verdict_cell(*row.unbiased) : "-")
                     << (row.matches_claim ? "" : "   << MISMATCH") << '\n';
                const auto witness_line = [&](const char* label, const Verdict& v) {
                    if (v.holds || !v.witness) return;
                    text << "    " << label << " witness: x1=" << v.witness->x1.to_string()
                         << " x2=" << v.witness->x2.to_string();
                    if (v.witness->z) text << " z=" << v.witness->z->to_string();
                    if (v.witness->offspring) {
                        text << " offspring=" << v.witness->offspring->to_string();
                    }
                    if (v.witness->z && !v.witness->measured.empty()) {
                        text << " lhs=" << v.witness->measured << " rhs=" << v.witness->expected;
                    } else if (!v.witness->measured.empty()) {
                        text << " prob=" << v.witness->measured;
                    }
                    if (!v.witness->note.empty()) text << " (" << v.witness->note << ")";
                    text << '\n';
                };
                witness_line("neutrality", row.neutral);
                witness_line("respectfulness", row.respectful);
            }
            text << "(* = statistical verdict; - = not certifiable for this operator)\n";
            for (const auto& violation : report.implication_violations) {
                text << "IMPLICATION VIOLATION: " << violation << '\n';
            }
            text << (report.consistent_with_claims && report.implications_hold
                         ? "classification consistent\n"
                         : "classification CONTRADICTS the documented split\n");
            if (cls_out->empty()) {
                out << text.str();
            } else {
                std::ofstream f(*cls_out);
                if (!f) throw UsageError("cannot open output file '" + *cls_out + "'");
                f << text.str();
            }
        }
        if (!report.consistent_with_claims || !report.implications_hold) exit_code = 1;
    });

    // oracle-drift ----------------------------------------------------------
    auto od_flags = std::make_shared<detail::CommonFlags>();
    auto od_max_n = std::make_shared<std::size_t>(4);
    auto od_max_mu = std::make_shared<std::size_t>(3);
    auto* oracle_cmd = app.add_subcommand(
        "oracle-drift", "exhaustive exact drift versus the closed form at small sizes");
    od_flags->attach(oracle_cmd);
    oracle_cmd->add_option("--max-n", *od_max_n, "enumeration limit for n (cost warning)");
    oracle_cmd->add_option("--max-mu", *od_max_mu, "enumeration limit for mu (cost warning)");
    oracle_cmd->callback([&, od_flags, od_max_n, od_max_mu] {
        const EngineConfig cfg = od_flags->engine_config();
        if (*od_max_n > 4 || *od_max_mu > 3) {
            err << "warning: enumeration above n=4/mu=3 grows quickly; expect long runtimes\n";
        }
        const ExactStepModel model(cfg, OracleLimits{*od_max_n, *od_max_mu});
        const Rational chi = cfg.mutation.expected_flips_exact();
        std::uint64_t checked = 0;
        std::uint64_t mismatches = 0;
        std::string first_mismatch;
        for (const auto& pop : all_populations(cfg.mu, cfg.n)) {
            const Rational enumerated = model.expected_next_diversity(pop);
            const Rational formula = exact::predicted_drift(
                cfg.mu, cfg.n, chi, Rational(pop.diversity()), cfg.tie);
            ++checked;
            if (enumerated != formula) {
                ++mismatches;
                if (first_mismatch.empty()) {
                    std::string members;
                    for (const auto& m : pop.members()) members += m.to_string() + " ";
                    first_mismatch = "P = " + members + "enumerated=" + enumerated.str() +
                                     " formula=" + formula.str();
                }
            }
        }
        Json j;
        j["config"] = detail::config_json(cfg);
        j["populations_checked"] = checked;
        j["mismatches"] = mismatches;
        if (!first_mismatch.empty()) j["first_mismatch"] = first_mismatch;
        j["pass"] = mismatches == 0;
        detail::emit(j, od_flags->out, out);
        err << "oracle-drift: " << checked << " populations, " << mismatches << " mismatches\n";
        if (mismatches != 0) exit_code = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const CapabilityError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}

} // namespace divlab::cli
