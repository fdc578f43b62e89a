#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delval/deletion_model.hpp"
#include "delval/game.hpp"
#include "delval/semivalue.hpp"

namespace delval {

// Ternary-state enumeration cap: exact scores cost O(n * 3^(n-1)).
inline constexpr int kMaxExactDeletionSources = 13;

enum class Method { Exact, MonteCarlo, Mcmc012, ScaledSemivalue, Risk };

std::string method_name(Method m);

struct EstimatorConfig {
    int num_chains = 4;          // M, parallel chains (>= 2 for Gelman-Rubin)
    int batch_size = 1000;       // b, samples appended per chain between checks
    double gr_threshold = 1.005; // stop once the statistic drops to this
    // Total sample budgets across all sources; 0 derives defaults from the
    // (epsilon, delta) plan: min_samples = plan, max_samples =
    // min(10 * plan, 10^7). Plain Monte-Carlo runs for exactly the planned
    // count when a target is set, else for max_samples when given.
    std::int64_t max_samples = 0;
    std::int64_t min_samples = 0;
    std::optional<std::pair<double, double>> target;  // (epsilon, delta) plan override
    std::uint64_t seed = 0;
    int threads = 1;
    int cvar_samples = 2048;  // per-coalition budget for the risk estimator
};

struct ValuationResult {
    std::vector<double> scores;
    Method method = Method::Exact;

    // diagnostics
    std::int64_t samples_used = 0;              // total across sources and chains
    std::vector<double> std_errors;             // per source; zero for exact methods
    double gelman_rubin_statistic = 0.0;        // worst (max) across sources; MCMC only
    bool converged = true;
    std::vector<int> starved_sources;           // sources that never appeared in a draw
    double max_importance_coefficient = 0.0;    // empirical max over drawn states; MCMC only
    double wall_seconds = 0.0;

    int num_sources() const { return static_cast<int>(scores.size()); }
};

// Samples needed for a max-abs error below epsilon with probability at
// least 1 - delta, for a utility range of the given width.
std::int64_t plan_sample_size(int n, double range_width, double epsilon, double delta);

// Exact score of every source: full enumeration of the per-source ternary
// states (absent / staying outside the coalition / in the coalition) with
// the NPO-extended coefficients. Guarded at kMaxExactDeletionSources.
ValuationResult exact_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                              const DeletionModel& model, int threads = 1);

// Direct Monte-Carlo estimator: draws staying sets from the model, then a
// coalition size from the induced weighting terms, then a uniform coalition
// of that size. Unbiased; per-source budget is the plan divided by n.
ValuationResult mc_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                           const DeletionModel& model, const EstimatorConfig& config);

// One importance draw for source i: every other source gets a uniform
// ternary state; returns (S, D') with S + i always inside D'.
std::pair<Coalition, Coalition> sample_012(int n, int i, Rng& rng);

// Importance-sampled estimator over uniform ternary states, for models
// whose pmf is queryable but hard to sample. Runs num_chains parallel
// chains per source and stops on the Gelman-Rubin statistic (after the
// min_samples floor) or on the max_samples cap.
ValuationResult mcmc012_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                                const DeletionModel& model, const EstimatorConfig& config);

// Potential scale reduction across chains (M >= 2, each length >= 2;
// unequal lengths are truncated to the shortest). Identical constant
// chains return exactly 1.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Baseline: pre-deletion semivalue times the source's marginal staying
// probability.
ValuationResult scaled_semivalue(const CooperativeGame& game, const SemivaluePrior& prior,
                                 const DeletionModel& model);

}  // namespace delval
