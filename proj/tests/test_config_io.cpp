#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "delval/config.hpp"
#include "delval/errors.hpp"
#include "delval/io.hpp"

using namespace delval;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents, const char* ext = ".json") {
        static int counter = 0;
        path = (std::filesystem::temp_directory_path() /
                ("delval_cfg_" + std::to_string(counter++) + ext))
                   .string();
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

constexpr const char* kFullConfig = R"({
  "seed": 42,
  "threads": 2,
  "output": {"dir": "out", "prefix": "demo"},
  "game": {"kind": "table", "n": 2, "values": [0.0, 0.5, 0.5, 0.8]},
  "prior": {"family": "shapley"},
  "deletion": {"kind": "independent", "p": [1.0, 0.7]},
  "method": {"name": "exact"}
})";

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("doubles format with shortest round-trip text") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "-0");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    for (const double x : {0.43, 0.28, 11.0 / 6.0, 1e-12, 123456.789}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("valuation serializers are stable") {
    ValuationResult result;
    result.scores = {0.43, 0.28};
    result.std_errors = {0.0, 0.0};
    result.method = Method::Exact;
    CHECK(valuation_to_csv(result) == "source_id,score,stderr\n0,0.43,0\n1,0.28,0\n");
    const auto j = valuation_to_json(result);
    CHECK(j.at("method") == "exact");
    CHECK(j.at("scores")[0] == 0.43);
    CHECK_FALSE(j.at("diagnostics").contains("gelman_rubin"));
}

TEST_CASE("full config parses and builds every section") {
    const TempFile file(kFullConfig);
    const auto config = load_config(file.path);
    CHECK(config.seed == 42);
    CHECK(config.threads == 2);
    CHECK(config.prefix == "demo");

    const auto game = build_game(config.raw.at("game"), config.seed);
    CHECK(game.num_sources() == 2);
    CHECK(game.evaluate(Coalition::of({0, 1})) == doctest::Approx(0.8));

    const auto prior = build_prior(config.raw.at("prior"));
    CHECK(prior.family == SemivaluePrior::Family::Shapley);

    const auto model = build_deletion_model(config.raw.at("deletion"));
    CHECK(model.pmf(Coalition::of({0}))== doctest::Approx(0.3));
}

TEST_CASE("config errors carry their location") {
    const TempFile broken("{\"seed\": }");
    CHECK_THROWS_AS(load_config(broken.path), config_error);
    CHECK_THROWS_AS(load_config("/does/not/exist.json"), config_error);

    CHECK_THROWS_AS(build_game(nlohmann::json{{"kind", "warp"}}, 1), config_error);
    CHECK_THROWS_AS(build_game(nlohmann::json{{"kind", "table"}}, 1), config_error);
    CHECK_THROWS_AS(build_prior(nlohmann::json{{"family", "zipf"}}), config_error);
    CHECK_THROWS_AS(build_deletion_model(nlohmann::json{{"kind", "markov"}}), config_error);
    CHECK_THROWS_AS(build_prior(nlohmann::json{{"family", "beta"}, {"alpha", 2.0}}),
                    config_error);
}

TEST_CASE("game kinds build from config") {
    CHECK(build_game({{"kind", "additive"}, {"weights", {1.0, 2.0}}}, 1).num_sources() == 2);
    CHECK(build_game({{"kind", "random_monotone"}, {"n", 5}}, 9).num_sources() == 5);
    CHECK(build_game({{"kind", "random"}, {"n", 4}, {"seed", 3}}, 9).num_sources() == 4);
    const auto sim = build_game({{"kind", "synthetic_similarity"}}, 5);
    CHECK(sim.num_sources() == 4);
}

TEST_CASE("deletion kinds build from config") {
    const auto categorical = build_deletion_model(
        nlohmann::json::parse(R"({"kind": "categorical", "n": 2,
            "table": [{"subset": [0], "prob": 0.3}, {"subset": [0, 1], "prob": 0.7}]})"));
    CHECK(categorical.pmf(Coalition::of({0})) == doctest::Approx(0.3));

    const auto sized = build_deletion_model(
        nlohmann::json::parse(R"({"kind": "size_weighted", "q": [0.2, 0.3, 0.5]})"));
    CHECK(sized.num_sources() == 2);

    const auto uncertain = build_deletion_model(
        nlohmann::json::parse(R"({"kind": "beta_bernoulli", "alpha": [4], "beta": [4]})"));
    CHECK(uncertain.marginal_staying_probability(0) == doctest::Approx(0.5));
}

TEST_CASE("estimator and risk sections") {
    const auto estimator = build_estimator_config(
        nlohmann::json::parse(
            R"({"chains": 6, "batch_size": 500, "gr_threshold": 1.01,
                "epsilon": 0.02, "delta": 0.1, "max_samples": 9000})"),
        7, 3);
    CHECK(estimator.num_chains == 6);
    CHECK(estimator.batch_size == 500);
    CHECK(estimator.seed == 7);
    CHECK(estimator.threads == 3);
    CHECK(estimator.max_samples == 9000);
    REQUIRE(estimator.target.has_value());
    CHECK(estimator.target->first == 0.02);

    CHECK_THROWS_AS(build_estimator_config(nlohmann::json{{"epsilon", 0.1}}, 1, 1),
                    config_error);

    const auto spec = build_risk_spec(nlohmann::json{{"side", "seeking"}, {"alpha", 0.4}});
    CHECK(spec.side == RiskSide::Seeking);
    CHECK(spec.alpha == 0.4);
    CHECK_THROWS_AS(build_risk_spec(nlohmann::json{{"side", "bold"}}), config_error);
    CHECK_THROWS_AS(build_risk_spec(nlohmann::json{{"alpha", 0.0}}), config_error);
    CHECK(build_risk_mode(nlohmann::json{{"mode", "exact"}}) == RiskMode::Exact);
    CHECK_THROWS_AS(build_risk_mode(nlohmann::json{{"mode", "warp"}}), config_error);
}

TEST_CASE("parsed config round-trips through serialization") {
    const TempFile file(kFullConfig);
    const auto config = load_config(file.path);
    const TempFile dumped(config.raw.dump(2));
    const auto reparsed = load_config(dumped.path);
    CHECK(reparsed.raw == config.raw);
    CHECK(reparsed.seed == config.seed);

    // both documents drive the same computation
    const auto a = exact_derdava(build_game(config.raw.at("game"), config.seed),
                                 build_prior(config.raw.at("prior")),
                                 build_deletion_model(config.raw.at("deletion")));
    const auto b = exact_derdava(build_game(reparsed.raw.at("game"), reparsed.seed),
                                 build_prior(reparsed.raw.at("prior")),
                                 build_deletion_model(reparsed.raw.at("deletion")));
    CHECK(a.scores == b.scores);
}

TEST_CASE("exact runs produce one zero-stderr row per source") {
    const auto game = make_random_monotone_game(10, 4);
    const auto model = DeletionModel::independent(std::vector<double>(10, 0.8));
    const auto result = exact_derdava(game, SemivaluePrior::shapley(), model);
    const auto csv = valuation_to_csv(result);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 11);  // header + 10 sources
    CHECK(csv.find(",0\n") != std::string::npos);
    for (double se : result.std_errors) CHECK(se == 0.0);
}

TEST_CASE("risk at alpha one serializes the same scores as the exact run") {
    // the two routes agree to far below serialization noise, though not
    // bitwise: they sum in different orders
    const auto game = make_table_game(2, {0.0, 0.5, 0.5, 0.8});
    const auto model = build_deletion_model(
        nlohmann::json{{"kind", "independent"}, {"p", {1.0, 0.7}}});
    EstimatorConfig config;
    const auto risk = risk_derdava(game, SemivaluePrior::shapley(), model,
                                   RiskSpec{RiskSide::Averse, 1.0}, config);
    const auto exact = exact_derdava(game, SemivaluePrior::shapley(), model);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(risk.scores[static_cast<std::size_t>(i)] -
                       exact.scores[static_cast<std::size_t>(i)]) <= 1e-12);
    }
}

namespace {

// End-to-end exit-code contract, exercised only when the harness points
// DELVAL_CLI at the built binary.
int run_cli(const std::string& cli, const std::string& args) {
    const std::string command = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes follow the contract") {
    const char* cli_env = std::getenv("DELVAL_CLI");
    if (cli_env == nullptr) return;  // library-only run
    const std::string cli = cli_env;
    const auto dir = std::filesystem::temp_directory_path() / "delval_cli_codes";
    std::filesystem::create_directories(dir);
    const auto out = " --output-dir \"" + dir.string() + "\"";

    const TempFile good(R"({
      "game": {"kind": "table", "n": 2, "values": [0.0, 0.5, 0.5, 0.8]},
      "prior": {"family": "shapley"},
      "deletion": {"kind": "independent", "p": [1.0, 0.7]},
      "method": {"name": "exact"}
    })");
    CHECK(run_cli(cli, "value \"" + good.path + "\"" + out) == 0);

    const TempFile bad_method(R"({
      "game": {"kind": "table", "n": 2, "values": [0.0, 0.5, 0.5, 0.8]},
      "prior": {"family": "shapley"},
      "deletion": {"kind": "independent", "p": [1.0, 0.7]},
      "method": {"name": "teleport"}
    })");
    CHECK(run_cli(cli, "value \"" + bad_method.path + "\"" + out) == 2);

    const TempFile malformed("{\"game\": }");
    CHECK(run_cli(cli, "value \"" + malformed.path + "\"" + out) == 2);

    // 14 sources exceeds the exact enumeration guard
    std::string widecfg = R"({
      "game": {"kind": "random_monotone", "n": 14, "seed": 1},
      "prior": {"family": "shapley"},
      "deletion": {"kind": "independent", "p": )";
    widecfg += "[0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5]";
    widecfg += R"(},
      "method": {"name": "exact"}
    })";
    const TempFile guard(widecfg);
    CHECK(run_cli(cli, "value \"" + guard.path + "\"" + out) == 3);

    const TempFile unknown_kind(R"({
      "game": {"kind": "table", "n": 2, "values": [0.0, 0.5, 0.5, 0.8]},
      "prior": {"family": "shapley"},
      "deletion": {"kind": "independent", "p": [1.0, 0.7]},
      "experiment": {"kind": "astrology"}
    })");
    CHECK(run_cli(cli, "experiment \"" + unknown_kind.path + "\"" + out) == 2);

    CHECK(run_cli(cli, "validate --trials 0" + out) == 2);
    CHECK(run_cli(cli, "validate --trials 2" + out) == 0);
    CHECK(run_cli(cli, "plan-samples --n 8") == 0);
    CHECK(run_cli(cli, "plan-samples --n 0") == 2);
}

TEST_CASE("report rows serialize in long format") {
    const std::vector<ReportRow> rows = {{"demo", "0", "score", 0.5, 0.0},
                                         {"demo", "1", "score", 0.25, 0.125}};
    CHECK(rows_to_csv(rows) ==
          "experiment,key,metric,value,stderr\ndemo,0,score,0.5,0\ndemo,1,score,0.25,0.125\n");
    const auto j = rows_to_json(rows);
    REQUIRE(j.size() == 2);
    CHECK(j[1].at("stderr") == 0.125);
}

TEST_SUITE_END();
