#include "delval/config.hpp"

#include <fstream>

#include "delval/errors.hpp"

namespace delval {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw config_error(where + ": " + what);
}

const nlohmann::json& require(const nlohmann::json& spec, const char* key,
                              const std::string& where) {
    const auto it = spec.find(key);
    if (it == spec.end()) fail(where, std::string("missing key '") + key + "'");
    return *it;
}

template <typename T>
T get_or(const nlohmann::json& spec, const char* key, T fallback) {
    const auto it = spec.find(key);
    return it == spec.end() ? fallback : it->get<T>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    RunConfig config;
    try {
        config.raw = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
    try {
        config.seed = get_or<std::uint64_t>(config.raw, "seed", 0);
        config.threads = get_or<int>(config.raw, "threads", 1);
        if (config.raw.contains("output")) {
            const auto& out = config.raw.at("output");
            config.output_dir = get_or<std::string>(out, "dir", ".");
            config.prefix = get_or<std::string>(out, "prefix", "run");
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    if (config.threads < 1) throw config_error(path + ": threads must be >= 1");
    return config;
}

CooperativeGame build_game(const nlohmann::json& spec, std::uint64_t seed) {
    const std::string where = "game";
    const auto kind = require(spec, "kind", where).get<std::string>();
    try {
        if (kind == "table") {
            const int n = require(spec, "n", where).get<int>();
            auto values = require(spec, "values", where).get<std::vector<double>>();
            return make_table_game(n, std::move(values));
        }
        if (kind == "additive") {
            return make_additive_game(require(spec, "weights", where).get<std::vector<double>>());
        }
        if (kind == "random_monotone") {
            return make_random_monotone_game(require(spec, "n", where).get<int>(),
                                             get_or<std::uint64_t>(spec, "seed", seed));
        }
        if (kind == "random") {
            return make_random_game(require(spec, "n", where).get<int>(),
                                    get_or<std::uint64_t>(spec, "seed", seed));
        }
        if (kind == "synthetic_similarity") {
            const auto fixture =
                make_synthetic_similarity_dataset(get_or<std::uint64_t>(spec, "seed", seed));
            const auto model = spec.contains("model") ? build_model_kind(spec.at("model"))
                                                      : ModelKind::knn(1);
            return build_utility(fixture.train, fixture.validation, fixture.partition, model);
        }
        if (kind == "csv") {
            const auto path = require(spec, "path", where).get<std::string>();
            const auto label = require(spec, "label_column", where).get<std::string>();
            const double val_fraction = get_or<double>(spec, "val_fraction", 0.2);
            const auto split_seed = get_or<std::uint64_t>(spec, "seed", seed);
            auto [train, validation] = ingest_csv(path, label, split_seed, val_fraction);
            const auto& part = require(spec, "partition", where);
            const auto part_kind = require(part, "kind", "game.partition").get<std::string>();
            SourcePartition partition;
            if (part_kind == "equal_random") {
                partition = equal_random_partition(
                    train.num_rows(),
                    require(part, "num_sources", "game.partition").get<int>(), split_seed);
            } else if (part_kind == "file") {
                partition = partition_from_csv(
                    require(part, "path", "game.partition").get<std::string>(),
                    train.num_rows());
            } else {
                fail("game.partition", "unknown kind '" + part_kind + "'");
            }
            return build_utility(train, validation, partition,
                                 build_model_kind(require(spec, "model", where)));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where, "unknown kind '" + kind + "'");
}

SemivaluePrior build_prior(const nlohmann::json& spec) {
    const std::string where = "prior";
    const auto family = require(spec, "family", where).get<std::string>();
    try {
        if (family == "shapley") return SemivaluePrior::shapley();
        if (family == "loo") return SemivaluePrior::loo();
        if (family == "banzhaf") return SemivaluePrior::banzhaf();
        if (family == "beta") {
            return SemivaluePrior::beta_family(require(spec, "alpha", where).get<double>(),
                                               require(spec, "beta", where).get<double>());
        }
        if (family == "custom") {
            return SemivaluePrior::custom_weights(
                require(spec, "weights", where).get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where, "unknown family '" + family + "'");
}

DeletionModel build_deletion_model(const nlohmann::json& spec) {
    const std::string where = "deletion";
    const auto kind = require(spec, "kind", where).get<std::string>();
    try {
        if (kind == "independent") {
            return DeletionModel::independent(
                require(spec, "p", where).get<std::vector<double>>());
        }
        if (kind == "size_weighted") {
            return DeletionModel::size_weighted(
                require(spec, "q", where).get<std::vector<double>>());
        }
        if (kind == "beta_bernoulli") {
            return DeletionModel::beta_bernoulli(
                require(spec, "alpha", where).get<std::vector<double>>(),
                require(spec, "beta", where).get<std::vector<double>>());
        }
        if (kind == "categorical") {
            const int n = require(spec, "n", where).get<int>();
            std::vector<std::pair<Coalition, double>> table;
            for (const auto& entry : require(spec, "table", where)) {
                Coalition subset;
                for (const int i : entry.at("subset").get<std::vector<int>>()) {
                    if (i < 0 || i >= n) fail(where, "subset member out of range");
                    subset = subset.with(i);
                }
                table.emplace_back(subset, entry.at("prob").get<double>());
            }
            return DeletionModel::categorical(n, std::move(table));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where, "unknown kind '" + kind + "'");
}

ModelKind build_model_kind(const nlohmann::json& spec) {
    const std::string where = "model";
    const auto kind = require(spec, "kind", where).get<std::string>();
    try {
        if (kind == "knn") return ModelKind::knn(get_or<int>(spec, "k", 3));
        if (kind == "gaussian_nb") return ModelKind::gaussian_nb();
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where, "unknown kind '" + kind + "'");
}

EstimatorConfig build_estimator_config(const nlohmann::json& spec, std::uint64_t seed,
                                       int threads) {
    EstimatorConfig config;
    config.seed = seed;
    config.threads = threads;
    const std::string where = "estimator";
    try {
        config.num_chains = get_or<int>(spec, "chains", config.num_chains);
        config.batch_size = get_or<int>(spec, "batch_size", config.batch_size);
        config.gr_threshold = get_or<double>(spec, "gr_threshold", config.gr_threshold);
        config.max_samples = get_or<std::int64_t>(spec, "max_samples", 0);
        config.min_samples = get_or<std::int64_t>(spec, "min_samples", 0);
        config.cvar_samples = get_or<int>(spec, "cvar_samples", config.cvar_samples);
        if (spec.contains("epsilon") != spec.contains("delta")) {
            fail(where, "epsilon and delta must be given together");
        }
        if (spec.contains("epsilon")) {
            config.target = {spec.at("epsilon").get<double>(), spec.at("delta").get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    }
    return config;
}

RiskSpec build_risk_spec(const nlohmann::json& spec) {
    const std::string where = "risk";
    RiskSpec out;
    try {
        const auto side = get_or<std::string>(spec, "side", "averse");
        if (side == "averse") out.side = RiskSide::Averse;
        else if (side == "seeking") out.side = RiskSide::Seeking;
        else if (side == "neutral") out.side = RiskSide::Neutral;
        else fail(where, "unknown side '" + side + "'");
        out.alpha = get_or<double>(spec, "alpha", 1.0);
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    }
    if (!(out.alpha > 0.0 && out.alpha <= 1.0)) fail(where, "alpha must be in (0, 1]");
    return out;
}

RiskMode build_risk_mode(const nlohmann::json& spec) {
    const auto mode = get_or<std::string>(spec, "mode", "auto");
    if (mode == "auto") return RiskMode::Auto;
    if (mode == "exact") return RiskMode::Exact;
    if (mode == "estimate") return RiskMode::Estimate;
    fail("risk", "unknown mode '" + mode + "'");
}

}  // namespace delval
