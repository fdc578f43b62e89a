#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "delval/config.hpp"
#include "delval/derdava.hpp"
#include "delval/errors.hpp"
#include "delval/experiments.hpp"
#include "delval/io.hpp"
#include "delval/risk.hpp"
#include "delval/validation.hpp"

namespace {

using namespace delval;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;
constexpr int kExitRuntime = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& over) {
    RunConfig config = load_config(path);
    if (over.seed) config.seed = *over.seed;
    if (over.threads) config.threads = *over.threads;
    if (over.output_dir) config.output_dir = *over.output_dir;
    if (config.threads < 1) throw config_error("threads must be >= 1");
    return config;
}

std::string output_path(const RunConfig& config, const std::string& suffix) {
    std::filesystem::create_directories(config.output_dir);
    return (std::filesystem::path(config.output_dir) / (config.prefix + suffix)).string();
}

void print_scores(const ValuationResult& result) {
    std::cout << "source  score  stderr\n";
    for (int i = 0; i < result.num_sources(); ++i) {
        std::cout << i << "  " << format_double(result.scores[static_cast<std::size_t>(i)])
                  << "  " << format_double(result.std_errors[static_cast<std::size_t>(i)])
                  << "\n";
    }
    std::cout << "method=" << method_name(result.method)
              << " samples=" << result.samples_used << " converged="
              << (result.converged ? "yes" : "no");
    if (result.method == Method::Mcmc012) {
        std::cout << " gelman_rubin=" << format_double(result.gelman_rubin_statistic);
    }
    std::cout << " wall_seconds=" << format_double(result.wall_seconds) << "\n";
    if (!result.starved_sources.empty()) {
        std::cout << "warning: sources never observed staying:";
        for (int i : result.starved_sources) std::cout << ' ' << i;
        std::cout << "\n";
    }
}

int cmd_value(const std::string& config_path, const Overrides& over) {
    const RunConfig config = load_with_overrides(config_path, over);
    const auto& raw = config.raw;
    if (!raw.contains("game") || !raw.contains("prior") || !raw.contains("deletion") ||
        !raw.contains("method")) {
        throw config_error("value: config needs game, prior, deletion and method sections");
    }
    const auto game = build_game(raw.at("game"), config.seed);
    const auto prior = build_prior(raw.at("prior"));
    const auto model = build_deletion_model(raw.at("deletion"));
    const auto& method = raw.at("method");
    const auto name = method.contains("name") ? method.at("name").get<std::string>() : "exact";
    const auto estimator = build_estimator_config(
        method.contains("estimator") ? method.at("estimator") : nlohmann::json::object(),
        config.seed, config.threads);

    ValuationResult result;
    if (name == "exact") {
        result = exact_derdava(game, prior, model, config.threads);
    } else if (name == "mc") {
        result = mc_derdava(game, prior, model, estimator);
    } else if (name == "mcmc012") {
        result = mcmc012_derdava(game, prior, model, estimator);
    } else if (name == "scaled") {
        result = scaled_semivalue(game, prior, model);
    } else if (name == "risk") {
        const auto& risk = method.contains("risk") ? method.at("risk") : nlohmann::json::object();
        result = risk_derdava(game, prior, model, build_risk_spec(risk), estimator,
                              build_risk_mode(risk));
    } else {
        throw config_error("value: unknown method '" + name + "'");
    }

    write_text_file(output_path(config, "_scores.csv"), valuation_to_csv(result));
    write_text_file(output_path(config, "_result.json"), valuation_to_json(result).dump(2) + "\n");
    print_scores(result);
    return kExitOk;
}

std::vector<double> scores_for_ranking(const nlohmann::json& spec, const CooperativeGame& game,
                                       const SemivaluePrior& prior, const DeletionModel& model,
                                       const RunConfig& config) {
    const auto method = spec.contains("score_method")
                            ? spec.at("score_method").get<std::string>()
                            : std::string("exact");
    const auto estimator = build_estimator_config(
        spec.contains("estimator") ? spec.at("estimator") : nlohmann::json::object(), config.seed,
        config.threads);
    if (method == "exact") return exact_derdava(game, prior, model, config.threads).scores;
    if (method == "mc") return mc_derdava(game, prior, model, estimator).scores;
    if (method == "mcmc012") return mcmc012_derdava(game, prior, model, estimator).scores;
    if (method == "scaled") return scaled_semivalue(game, prior, model).scores;
    if (method == "semivalue") return exact_semivalue(game, prior);
    throw config_error("experiment: unknown score_method '" + method + "'");
}

int cmd_experiment(const std::string& config_path, const Overrides& over) {
    const RunConfig config = load_with_overrides(config_path, over);
    const auto& raw = config.raw;
    if (!raw.contains("experiment")) throw config_error("experiment: missing experiment section");
    const auto& spec = raw.at("experiment");
    if (!spec.contains("kind")) throw config_error("experiment: missing kind");
    const auto kind = spec.at("kind").get<std::string>();
    const auto prior = raw.contains("prior") ? build_prior(raw.at("prior"))
                                             : SemivaluePrior::shapley();

    std::vector<ReportRow> rows;
    if (kind == "deletion_simulation") {
        const auto game = build_game(raw.at("game"), config.seed);
        const auto model = build_deletion_model(raw.at("deletion"));
        const int trials = spec.contains("trials") ? spec.at("trials").get<int>() : 10000;
        if (trials < 1) throw config_error("experiment: trials must be >= 1");
        rows = run_deletion_simulation(game, prior, model, trials, config.seed, config.threads)
                   .rows();
    } else if (kind == "addition_removal") {
        const auto game = build_game(raw.at("game"), config.seed);
        const auto model = build_deletion_model(raw.at("deletion"));
        const auto scores = scores_for_ranking(spec, game, prior, model, config);
        const auto order = rank_order_from_name(
            spec.contains("order") ? spec.at("order").get<std::string>() : "lowest_first");
        const auto mode = step_mode_from_name(
            spec.contains("mode") ? spec.at("mode").get<std::string>() : "remove");
        const int draws = spec.contains("draws") ? spec.at("draws").get<int>() : 2000;
        rows = rows_from_curve("addition_removal",
                               run_addition_removal(game, model, scores, order, mode, config.seed,
                                                    draws));
    } else if (kind == "staying_sweep") {
        const auto game = build_game(raw.at("game"), config.seed);
        const auto grid = spec.at("grid").get<std::vector<double>>();
        for (const auto& row : run_staying_sweep(game, prior, grid, config.threads)) {
            const std::string key = std::to_string(row.source);
            rows.push_back({"staying_sweep", key, "staying_probability",
                            row.staying_probability, 0});
            rows.push_back({"staying_sweep", key, "semivalue", row.semivalue, 0});
            rows.push_back({"staying_sweep", key, "derdava", row.derdava, 0});
        }
    } else if (kind == "risk_sweep") {
        const auto game = build_game(raw.at("game"), config.seed);
        const auto model = build_deletion_model(raw.at("deletion"));
        const auto alphas = spec.at("alphas").get<std::vector<double>>();
        const auto report = run_risk_sweep(game, prior, model, alphas, config.threads);
        for (std::size_t i = 0; i < report.derdava.size(); ++i) {
            rows.push_back({"risk_sweep", "s" + std::to_string(i), "derdava",
                            report.derdava[i], 0});
            rows.push_back({"risk_sweep", "s" + std::to_string(i), "semivalue",
                            report.semivalue[i], 0});
        }
        for (const auto& row : report.rows) {
            for (std::size_t i = 0; i < row.scores.size(); ++i) {
                rows.push_back({"risk_sweep",
                                "a" + format_double(row.alpha) + "_" +
                                    risk_side_name(row.side) + "_s" + std::to_string(i),
                                "risk_derdava", row.scores[i], 0});
            }
        }
    } else if (kind == "similarity") {
        const auto grid = spec.at("shared_p_grid").get<std::vector<double>>();
        const double others = spec.contains("others_p") ? spec.at("others_p").get<double>() : 1.0;
        const int knn_k = spec.contains("knn_k") ? spec.at("knn_k").get<int>() : 1;
        for (const auto& row :
             run_similarity(config.seed, grid, others, prior, knn_k, config.threads)) {
            const std::string key =
                "p" + format_double(row.shared_p) + "_s" + std::to_string(row.source);
            rows.push_back({"similarity", key, "semivalue", row.semivalue, 0});
            rows.push_back({"similarity", key, "derdava", row.derdava, 0});
        }
    } else if (kind == "quality") {
        const auto rates = spec.at("rates").get<std::vector<double>>();
        const double staying = spec.contains("staying_p") ? spec.at("staying_p").get<double>()
                                                          : 0.9;
        const auto model_kind = spec.contains("model") ? build_model_kind(spec.at("model"))
                                                       : ModelKind::knn(3);
        const int rows_per_source =
            spec.contains("rows_per_source") ? spec.at("rows_per_source").get<int>() : 30;
        const int validation_rows =
            spec.contains("validation_rows") ? spec.at("validation_rows").get<int>() : 120;
        const auto report = run_quality(config.seed, rates, staying, prior, model_kind,
                                        rows_per_source, validation_rows, config.threads);
        for (std::size_t i = 0; i < report.derdava.size(); ++i) {
            const std::string key = std::to_string(i);
            rows.push_back({"quality", key, "noise_rate", report.noise_rates[i], 0});
            rows.push_back({"quality", key, "semivalue", report.semivalue[i], 0});
            rows.push_back({"quality", key, "derdava", report.derdava[i], 0});
        }
        rows.push_back({"quality", "all", "spearman", report.spearman_noise_vs_score, 0});
    } else {
        throw config_error("experiment: unknown kind '" + kind + "'");
    }

    write_text_file(output_path(config, "_" + kind + ".csv"), rows_to_csv(rows));
    write_text_file(output_path(config, "_" + kind + ".json"), rows_to_json(rows).dump(2) + "\n");
    std::cout << kind << ": " << rows.size() << " rows written to " << config.output_dir << "\n";
    return kExitOk;
}

int cmd_validate(std::uint64_t seed, int trials, const std::string& output_dir) {
    if (trials < 1) throw config_error("validate: trials must be >= 1");
    std::vector<AxiomReport> reports;
    for (const Axiom axiom : {Axiom::RobustLinearity, Axiom::RobustDummyPlayer,
                              Axiom::RobustInterchangeability, Axiom::RobustMonotonicity}) {
        reports.push_back(check_axiom(axiom, trials, seed));
    }
    const SemivaluePrior priors[] = {SemivaluePrior::shapley(), SemivaluePrior::banzhaf(),
                                     SemivaluePrior::loo(), SemivaluePrior::beta_family(16, 4)};
    for (const auto& prior : priors) {
        for (int n = 3; n <= 10; n += 1) {
            for (int nulls = 1; nulls < n; ++nulls) {
                auto report = check_npo_consistency(prior, n, nulls,
                                                    derive_seed({seed, static_cast<std::uint64_t>(n),
                                                                 static_cast<std::uint64_t>(nulls)}));
                if (!report.passed) reports.push_back(std::move(report));
            }
        }
        // one representative success row per family keeps the report small
        reports.push_back(check_npo_consistency(prior, 8, 3, seed));
    }
    reports.push_back(check_dual_equivalence(trials, seed));
    reports.push_back(check_restriction_consistency(trials, seed));

    bool all_passed = true;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& report : reports) {
        all_passed = all_passed && report.passed;
        out.push_back(report.to_json());
        std::cout << (report.passed ? "pass" : "FAIL") << "  " << report.axiom;
        if (!report.passed) std::cout << "  [" << report.witness << "]";
        std::cout << "\n";
    }
    std::filesystem::create_directories(output_dir);
    write_text_file((std::filesystem::path(output_dir) / "validate.json").string(),
                    out.dump(2) + "\n");
    return all_passed ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deletion-robust data valuation for cooperative games"};
    app.require_subcommand(1);

    Overrides over;
    std::string config_path;
    auto* value = app.add_subcommand("value", "compute valuation scores from a config file");
    value->add_option("config", config_path, "JSON config path")->required();

    std::string experiment_config;
    auto* experiment = app.add_subcommand("experiment", "run a configured study");
    experiment->add_option("config", experiment_config, "JSON config path")->required();

    int validate_trials = 50;
    auto* validate = app.add_subcommand("validate", "run the fairness and consistency suites");
    validate->add_option("--trials", validate_trials, "trials per randomized check");

    int plan_n = 0;
    double plan_range = 1.0, plan_epsilon = 0.01, plan_delta = 0.05;
    auto* plan = app.add_subcommand("plan-samples", "Monte-Carlo sample-size bound");
    plan->add_option("--n", plan_n, "number of sources")->required();
    plan->add_option("--range", plan_range, "utility range width");
    plan->add_option("--epsilon", plan_epsilon, "target max-abs error");
    plan->add_option("--delta", plan_delta, "failure probability");

    for (auto* sub : {value, experiment, validate}) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&over](std::uint64_t s) { over.seed = s; }, "override the config seed");
        sub->add_option_function<int>(
            "--threads", [&over](int t) { over.threads = t; }, "parallelism cap");
        sub->add_option_function<std::string>(
            "--output-dir", [&over](const std::string& d) { over.output_dir = d; },
            "override the output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (value->parsed()) return cmd_value(config_path, over);
        if (experiment->parsed()) return cmd_experiment(experiment_config, over);
        if (validate->parsed()) {
            return cmd_validate(over.seed.value_or(20240501ULL), validate_trials,
                                over.output_dir.value_or("."));
        }
        if (plan->parsed()) {
            std::cout << plan_sample_size(plan_n, plan_range, plan_epsilon, plan_delta) << "\n";
            return kExitOk;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const guard_error& e) {
        std::cerr << "guard error: " << e.what() << "\n";
        return kExitGuard;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
