#include "delval/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/numeric.hpp"
#include "delval/parallel.hpp"
#include "delval/rng.hpp"

namespace delval {

namespace {
constexpr std::size_t kExactExpectationSupportCap = 4096;
constexpr std::uint64_t kTagSim = 0x64656C73696DULL;
constexpr std::uint64_t kTagCurve = 0x6375727665ULL;
}  // namespace

std::vector<ReportRow> DeletionSimulationReport::rows() const {
    std::vector<ReportRow> out;
    for (std::size_t i = 0; i < recomputed_mean.size(); ++i) {
        const std::string key = std::to_string(i);
        out.push_back({"deletion_simulation", key, "recomputed_mean", recomputed_mean[i],
                       recomputed_stderr[i]});
        out.push_back({"deletion_simulation", key, "recomputed_spread", recomputed_spread[i], 0});
        out.push_back({"deletion_simulation", key, "derdava", derdava[i], 0});
        out.push_back({"deletion_simulation", key, "semivalue", semivalue[i], 0});
    }
    return out;
}

DeletionSimulationReport run_deletion_simulation(const CooperativeGame& game,
                                                 const SemivaluePrior& prior,
                                                 const DeletionModel& model, int trials,
                                                 std::uint64_t seed, int threads) {
    if (trials < 1) throw std::invalid_argument("run_deletion_simulation: trials must be >= 1");
    const int n = game.num_sources();
    if (model.num_sources() != n) {
        throw std::invalid_argument("run_deletion_simulation: support sizes differ");
    }
    const auto table = npo_extend(prior, n);

    std::vector<std::vector<double>> per_trial(
        static_cast<std::size_t>(trials),
        std::vector<double>(static_cast<std::size_t>(n), 0.0));
    parallel_for(threads, trials, [&](int t) {
        Rng rng(derive_seed({seed, kTagSim, static_cast<std::uint64_t>(t)}));
        const Coalition stayers = model.sample(rng);
        if (stayers.is_empty()) return;  // everyone quit: all scores stay zero
        const auto members = stayers.members();
        const auto sub_scores =
            semivalue_from_coefficients(restrict_game(game, stayers), table, stayers.size());
        auto& row = per_trial[static_cast<std::size_t>(t)];
        for (std::size_t j = 0; j < members.size(); ++j) {
            row[static_cast<std::size_t>(members[j])] = sub_scores[j];
        }
    });

    DeletionSimulationReport report;
    report.trials = trials;
    report.recomputed_mean.assign(static_cast<std::size_t>(n), 0.0);
    report.recomputed_stderr.assign(static_cast<std::size_t>(n), 0.0);
    report.recomputed_spread.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        RunningStats stats;
        for (int t = 0; t < trials; ++t) {
            stats.add(per_trial[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]);
        }
        report.recomputed_mean[static_cast<std::size_t>(i)] = stats.mean;
        report.recomputed_stderr[static_cast<std::size_t>(i)] = stats.std_error();
        report.recomputed_spread[static_cast<std::size_t>(i)] = std::sqrt(stats.variance());
    }
    report.derdava = exact_derdava(game, prior, model, threads).scores;
    report.semivalue = exact_semivalue(game, prior);
    return report;
}

RankOrder rank_order_from_name(const std::string& name) {
    if (name == "highest_first") return RankOrder::HighestFirst;
    if (name == "lowest_first") return RankOrder::LowestFirst;
    if (name == "random") return RankOrder::Random;
    throw config_error("unknown order '" + name + "' (highest_first|lowest_first|random)");
}

StepMode step_mode_from_name(const std::string& name) {
    if (name == "add") return StepMode::Add;
    if (name == "remove") return StepMode::Remove;
    throw config_error("unknown mode '" + name + "' (add|remove)");
}

namespace {

CurvePoint expected_utility(const CooperativeGame& game, const DeletionModel& model,
                            Coalition retained, std::uint64_t seed, int draws) {
    if (model.support_enumerable()) {
        const auto support = model.enumerate_support();
        if (support.size() <= kExactExpectationSupportCap) {
            KahanSum acc;
            for (const auto& [stayers, prob] : support) {
                acc.add(prob * game.evaluate(retained.intersect(stayers)));
            }
            return {0.0, acc.value(), 0.0};
        }
    }
    Rng rng(seed);
    RunningStats stats;
    for (int d = 0; d < draws; ++d) {
        stats.add(game.evaluate(retained.intersect(model.sample(rng))));
    }
    return {0.0, stats.mean, stats.std_error()};
}

}  // namespace

std::vector<CurvePoint> run_addition_removal(const CooperativeGame& game,
                                             const DeletionModel& model,
                                             const std::vector<double>& scores, RankOrder order,
                                             StepMode mode, std::uint64_t seed,
                                             int deletion_draws) {
    const int n = game.num_sources();
    if (static_cast<int>(scores.size()) != n) {
        throw std::invalid_argument("run_addition_removal: need one score per source");
    }
    std::vector<int> sources(static_cast<std::size_t>(n));
    std::iota(sources.begin(), sources.end(), 0);
    switch (order) {
        case RankOrder::HighestFirst:
            std::stable_sort(sources.begin(), sources.end(), [&](int a, int b) {
                return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
            });
            break;
        case RankOrder::LowestFirst:
            std::stable_sort(sources.begin(), sources.end(), [&](int a, int b) {
                return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
            });
            break;
        case RankOrder::Random: {
            Rng rng(derive_seed({seed, 0x726E64ULL}));
            for (std::size_t i = sources.size(); i > 1; --i) {
                const std::size_t j = rng.below(i);
                std::swap(sources[i - 1], sources[j]);
            }
            break;
        }
    }

    std::vector<CurvePoint> curve;
    curve.reserve(static_cast<std::size_t>(n) + 1);
    Coalition retained = mode == StepMode::Add ? Coalition::empty_set() : game.support();
    for (int step = 0; step <= n; ++step) {
        auto point = expected_utility(game, model, retained,
                                      derive_seed({seed, kTagCurve,
                                                   static_cast<std::uint64_t>(step)}),
                                      deletion_draws);
        point.x = step;
        curve.push_back(point);
        if (step < n) {
            const int next = sources[static_cast<std::size_t>(step)];
            retained = mode == StepMode::Add ? retained.with(next) : retained.without(next);
        }
    }
    return curve;
}

std::vector<StayingSweepRow> run_staying_sweep(const CooperativeGame& game,
                                               const SemivaluePrior& prior,
                                               const std::vector<double>& grid, int threads) {
    const int n = game.num_sources();
    if (static_cast<int>(grid.size()) != n) {
        throw std::invalid_argument("run_staying_sweep: need one probability per source");
    }
    const auto model = DeletionModel::independent(grid);
    const auto semivalues = exact_semivalue(game, prior);
    const auto scores = exact_derdava(game, prior, model, threads).scores;
    std::vector<StayingSweepRow> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rows.push_back({i, grid[static_cast<std::size_t>(i)],
                        semivalues[static_cast<std::size_t>(i)],
                        scores[static_cast<std::size_t>(i)]});
    }
    return rows;
}

RiskSweepReport run_risk_sweep(const CooperativeGame& game, const SemivaluePrior& prior,
                               const DeletionModel& model, const std::vector<double>& alphas,
                               int threads) {
    if (alphas.empty()) throw std::invalid_argument("run_risk_sweep: empty alpha grid");
    RiskSweepReport report;
    report.derdava = exact_derdava(game, prior, model, threads).scores;
    report.semivalue = exact_semivalue(game, prior);
    EstimatorConfig config;
    config.threads = threads;
    for (const double alpha : alphas) {
        for (const RiskSide side : {RiskSide::Averse, RiskSide::Seeking}) {
            RiskSweepRow row;
            row.alpha = alpha;
            row.side = side;
            row.scores =
                risk_derdava(game, prior, model, RiskSpec{side, alpha}, config, RiskMode::Exact)
                    .scores;
            if (alpha == 1.0) {
                double err = 0.0;
                for (std::size_t i = 0; i < row.scores.size(); ++i) {
                    err = std::max(err, std::abs(row.scores[i] - report.derdava[i]));
                }
                row.matches_derdava = err <= 1e-9;
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::vector<SimilarityRow> run_similarity(std::uint64_t seed,
                                          const std::vector<double>& shared_p_grid,
                                          double others_p, const SemivaluePrior& prior, int knn_k,
                                          int threads) {
    if (shared_p_grid.empty()) throw std::invalid_argument("run_similarity: empty grid");
    const auto fixture = make_synthetic_similarity_dataset(seed);
    const auto game =
        build_utility(fixture.train, fixture.validation, fixture.partition, ModelKind::knn(knn_k));
    const auto semivalues = exact_semivalue(game, prior);
    std::vector<SimilarityRow> rows;
    for (const double shared_p : shared_p_grid) {
        std::vector<double> p(4, others_p);
        p[SyntheticSimilarity::kShared] = shared_p;
        const auto scores =
            exact_derdava(game, prior, DeletionModel::independent(p), threads).scores;
        for (int i = 0; i < 4; ++i) {
            rows.push_back({shared_p, i, semivalues[static_cast<std::size_t>(i)],
                            scores[static_cast<std::size_t>(i)]});
        }
    }
    return rows;
}

QualityReport run_quality(std::uint64_t seed, const std::vector<double>& noise_rates,
                          double staying_probability, const SemivaluePrior& prior,
                          ModelKind model_kind, int rows_per_source, int validation_rows,
                          int threads) {
    const int n = static_cast<int>(noise_rates.size());
    if (n < 2) throw std::invalid_argument("run_quality: need at least two sources");
    const auto blobs = make_two_class_blobs(n, rows_per_source, validation_rows, seed);
    const auto noisy = add_label_noise(blobs.train, noise_rates, blobs.partition, seed);
    const auto game = build_utility(noisy, blobs.validation, blobs.partition, model_kind);
    QualityReport report;
    report.noise_rates = noise_rates;
    report.semivalue = exact_semivalue(game, prior);
    const std::vector<double> p(static_cast<std::size_t>(n), staying_probability);
    report.derdava = exact_derdava(game, prior, DeletionModel::independent(p), threads).scores;
    report.spearman_noise_vs_score = spearman(report.noise_rates, report.derdava);
    return report;
}

std::vector<ReportRow> rows_from_curve(const std::string& experiment,
                                       const std::vector<CurvePoint>& curve) {
    std::vector<ReportRow> rows;
    rows.reserve(curve.size());
    for (const auto& point : curve) {
        rows.push_back({experiment, std::to_string(static_cast<long long>(point.x)),
                        "expected_utility", point.y_mean, point.y_stderr});
    }
    return rows;
}

}  // namespace delval
