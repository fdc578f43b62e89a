#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delval/datasets.hpp"
#include "delval/deletion_model.hpp"
#include "delval/derdava.hpp"
#include "delval/game.hpp"
#include "delval/risk.hpp"
#include "delval/semivalue.hpp"

namespace delval {

struct CurvePoint {
    double x = 0.0;
    double y_mean = 0.0;
    double y_stderr = 0.0;  // zero when the expectation is exact
};

// Long-format row shared by every experiment report:
// experiment, key (source id / step / grid cell), metric, value, stderr.
struct ReportRow {
    std::string experiment;
    std::string key;
    std::string metric;
    double value = 0.0;
    double std_error = 0.0;
};

// Draws staying sets, recomputes the extended semivalue on each surviving
// sub-game (quitters scored zero), and reports the per-source mean and
// spread next to the upfront deletion-robust score and the pre-deletion
// semivalue.
struct DeletionSimulationReport {
    int trials = 0;
    std::vector<double> recomputed_mean;
    std::vector<double> recomputed_stderr;
    std::vector<double> recomputed_spread;  // standard deviation across trials
    std::vector<double> derdava;
    std::vector<double> semivalue;
    std::vector<ReportRow> rows() const;
};

DeletionSimulationReport run_deletion_simulation(const CooperativeGame& game,
                                                 const SemivaluePrior& prior,
                                                 const DeletionModel& model, int trials,
                                                 std::uint64_t seed, int threads = 1);

enum class RankOrder { HighestFirst, LowestFirst, Random };
enum class StepMode { Add, Remove };

RankOrder rank_order_from_name(const std::string& name);
StepMode step_mode_from_name(const std::string& name);

// Orders sources by the given scores and reports the expected post-deletion
// utility of the retained set after each step. Exact via support
// enumeration when the support is small, otherwise sampled.
std::vector<CurvePoint> run_addition_removal(const CooperativeGame& game,
                                             const DeletionModel& model,
                                             const std::vector<double>& scores, RankOrder order,
                                             StepMode mode, std::uint64_t seed,
                                             int deletion_draws = 2000);

struct StayingSweepRow {
    int source = 0;
    double staying_probability = 0.0;
    double semivalue = 0.0;
    double derdava = 0.0;
};

// Assigns the grid of independent staying probabilities to the (otherwise
// interchangeable) sources of the game, one per source.
std::vector<StayingSweepRow> run_staying_sweep(const CooperativeGame& game,
                                               const SemivaluePrior& prior,
                                               const std::vector<double>& grid, int threads = 1);

struct RiskSweepRow {
    double alpha = 0.0;
    RiskSide side = RiskSide::Averse;
    std::vector<double> scores;
    bool matches_derdava = false;  // checked at alpha = 1
};

struct RiskSweepReport {
    std::vector<double> derdava;
    std::vector<double> semivalue;
    std::vector<RiskSweepRow> rows;
};

RiskSweepReport run_risk_sweep(const CooperativeGame& game, const SemivaluePrior& prior,
                               const DeletionModel& model, const std::vector<double>& alphas,
                               int threads = 1);

// Data-similarity study on the synthetic four-source fixture: sweeps the
// duplicated source's staying probability while the others hold theirs.
struct SimilarityRow {
    double shared_p = 0.0;
    int source = 0;
    double semivalue = 0.0;
    double derdava = 0.0;
};

std::vector<SimilarityRow> run_similarity(std::uint64_t seed, const std::vector<double>& shared_p_grid,
                                          double others_p, const SemivaluePrior& prior,
                                          int knn_k = 1, int threads = 1);

// Data-quality study: per-source label noise at a constant staying
// probability; reports scores and the rank correlation against noise.
struct QualityReport {
    std::vector<double> noise_rates;
    std::vector<double> derdava;
    std::vector<double> semivalue;
    double spearman_noise_vs_score = 0.0;
};

QualityReport run_quality(std::uint64_t seed, const std::vector<double>& noise_rates,
                          double staying_probability, const SemivaluePrior& prior,
                          ModelKind model_kind, int rows_per_source = 30,
                          int validation_rows = 120, int threads = 1);

std::vector<ReportRow> rows_from_curve(const std::string& experiment,
                                       const std::vector<CurvePoint>& curve);

}  // namespace delval
