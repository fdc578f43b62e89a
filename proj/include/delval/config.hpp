#pragma once

#include <cstdint>
#include <string>

#include "delval/datasets.hpp"
#include "delval/deletion_model.hpp"
#include "delval/derdava.hpp"
#include "delval/game.hpp"
#include "delval/risk.hpp"
#include "delval/semivalue.hpp"

#include "json.hpp"

namespace delval {

// Parsed run configuration; `raw` keeps the document for the sections the
// subcommands consume lazily. See the README for the schema.
struct RunConfig {
    nlohmann::json raw;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output_dir = ".";
    std::string prefix = "run";
};

RunConfig load_config(const std::string& path);

// Builders for the config sections. All throw config_error with the
// offending JSON pointer in the message.
CooperativeGame build_game(const nlohmann::json& spec, std::uint64_t seed);
SemivaluePrior build_prior(const nlohmann::json& spec);
DeletionModel build_deletion_model(const nlohmann::json& spec);
ModelKind build_model_kind(const nlohmann::json& spec);
EstimatorConfig build_estimator_config(const nlohmann::json& spec, std::uint64_t seed,
                                       int threads);
RiskSpec build_risk_spec(const nlohmann::json& spec);
RiskMode build_risk_mode(const nlohmann::json& spec);

}  // namespace delval
