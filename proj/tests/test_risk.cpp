#include "doctest.h"

#include <cmath>

#include "delval/errors.hpp"
#include "delval/risk.hpp"
#include "oracle.hpp"

using namespace delval;

namespace {

CooperativeGame fixture_game() { return make_table_game(2, {0.0, 0.5, 0.5, 0.8}); }
DeletionModel fixture_model() { return DeletionModel::independent({1.0, 0.7}); }

DiscreteDistribution random_distribution(Rng& rng) {
    const int atoms = 1 + static_cast<int>(rng.below(6));
    std::vector<std::pair<double, double>> raw;
    double total = 0.0;
    for (int a = 0; a < atoms; ++a) {
        const double w = 0.05 + rng.uniform01();
        raw.emplace_back(4.0 * rng.uniform01() - 2.0, w);
        total += w;
    }
    for (auto& [v, p] : raw) p /= total;
    return DiscreteDistribution::from_atoms(std::move(raw));
}

}  // namespace

TEST_SUITE_BEGIN("risk");

TEST_CASE("atom merging and validation") {
    const auto dist = DiscreteDistribution::from_atoms(
        {{1.0, 0.25}, {1.0 + 1e-13, 0.25}, {2.0, 0.5}, {3.0, 0.0}});
    REQUIRE(dist.size() == 2);
    CHECK(dist.prob(0) == doctest::Approx(0.5));
    CHECK(dist.value(1) == 2.0);

    CHECK_THROWS_AS(DiscreteDistribution::from_atoms({}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution::from_atoms({{1.0, 0.4}}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution::from_atoms({{1.0, -0.5}, {2.0, 1.5}}),
                    std::invalid_argument);
}

TEST_CASE("lower-tail expectation on the worked example") {
    const auto dist =
        DiscreteDistribution::from_atoms({{1.0, 0.2}, {2.0, 0.3}, {3.0, 0.5}});
    CHECK(std::abs(c_cvar_minus(dist, 0.6) - 11.0 / 6.0) <= 1e-12);
    CHECK(std::abs(c_cvar_minus(dist, 1.0) - dist.mean()) <= 1e-12);
    // tail below the first atom's mass pins the minimum
    CHECK(c_cvar_minus(dist, 0.1) == doctest::Approx(1.0));

    const auto single = DiscreteDistribution::from_atoms({{4.2, 1.0}});
    CHECK(c_cvar_minus(single, 0.37) == doctest::Approx(4.2));
    CHECK(c_cvar_minus(single, 1.0) == doctest::Approx(4.2));

    CHECK_THROWS_AS(c_cvar_minus(dist, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(c_cvar_minus(dist, 1.5), std::invalid_argument);
}

TEST_CASE("upper tail mirrors the lower tail") {
    const auto dist =
        DiscreteDistribution::from_atoms({{1.0, 0.2}, {2.0, 0.3}, {3.0, 0.5}});
    CHECK(c_cvar_plus(dist, 0.5) == doctest::Approx(3.0));
    CHECK(std::abs(c_cvar_plus(dist, 1.0) - dist.mean()) <= 1e-12);

    // reflection symmetry around the midpoint
    const auto symmetric = DiscreteDistribution::from_atoms(
        {{-2.0, 0.2}, {-1.0, 0.3}, {1.0, 0.3}, {2.0, 0.2}});
    for (const double alpha : {0.15, 0.3, 0.6, 0.9, 1.0}) {
        CHECK(c_cvar_plus(symmetric, alpha) ==
              doctest::Approx(-c_cvar_minus(symmetric, alpha)).epsilon(1e-12));
    }
}

TEST_CASE("split formula agrees with the quantile integral") {
    Rng rng(64);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dist = random_distribution(rng);
        const double alpha = 0.01 + 0.99 * rng.uniform01();
        CHECK(c_cvar_minus(dist, alpha) ==
              doctest::Approx(oracle::cvar_lower(dist, alpha)).epsilon(1e-11));
    }
}

TEST_CASE("tail bounds, ordering and alpha monotonicity") {
    Rng rng(65);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dist = random_distribution(rng);
        double previous_lower = dist.min_value() - 1.0;
        double previous_upper = dist.max_value() + 1.0;
        for (const double alpha : {0.1, 0.25, 0.5, 0.75, 1.0}) {
            const double lower = c_cvar_minus(dist, alpha);
            const double upper = c_cvar_plus(dist, alpha);
            CHECK(lower >= dist.min_value() - 1e-12);
            CHECK(upper <= dist.max_value() + 1e-12);
            CHECK(lower <= dist.mean() + 1e-12);
            CHECK(upper >= dist.mean() - 1e-12);
            CHECK(lower >= previous_lower - 1e-12);  // nondecreasing in alpha
            CHECK(upper <= previous_upper + 1e-12);  // nonincreasing in alpha
            previous_lower = lower;
            previous_upper = upper;
        }
    }
}

TEST_CASE("lower tail is super-additive over independent sums") {
    Rng rng(66);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_distribution(rng);
        const auto y = random_distribution(rng);
        const auto sum = independent_sum(x, y);
        const double alpha = 0.05 + 0.95 * rng.uniform01();
        CHECK(c_cvar_minus(sum, alpha) >=
              c_cvar_minus(x, alpha) + c_cvar_minus(y, alpha) - 1e-9);
        CHECK(c_cvar_plus(sum, alpha) <=
              c_cvar_plus(x, alpha) + c_cvar_plus(y, alpha) + 1e-9);
    }
}

TEST_CASE("random utility distribution aggregates the staying sets") {
    const auto game = fixture_game();
    const auto model = fixture_model();
    const auto both = random_utility_distribution(game, model, Coalition::of({0, 1}));
    REQUIRE(both.size() == 2);
    CHECK(both.value(0) == doctest::Approx(0.5));
    CHECK(both.prob(0) == doctest::Approx(0.3));
    CHECK(both.value(1) == doctest::Approx(0.8));
    CHECK(both.prob(1) == doctest::Approx(0.7));

    const auto empty = random_utility_distribution(game, model, Coalition::empty_set());
    REQUIRE(empty.size() == 1);
    CHECK(empty.value(0) == doctest::Approx(0.0));

    const auto certain = DeletionModel::independent({1.0, 1.0});
    const auto point = random_utility_distribution(game, certain, Coalition::of({0, 1}));
    REQUIRE(point.size() == 1);
    CHECK(point.value(0) == doctest::Approx(0.8));
}

TEST_CASE("alpha one recovers the deletion-robust scores") {
    EstimatorConfig config;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        const auto game = make_random_game(n, 500 + trial);
        Rng rng(trial);
        std::vector<double> p(static_cast<std::size_t>(n));
        for (auto& x : p) x = rng.uniform01();
        const auto model = DeletionModel::independent(p);
        const auto prior = trial % 2 == 0 ? SemivaluePrior::shapley() : SemivaluePrior::banzhaf();
        const auto robust = exact_derdava(game, prior, model).scores;
        for (const RiskSide side : {RiskSide::Averse, RiskSide::Seeking, RiskSide::Neutral}) {
            const auto scores =
                risk_derdava(game, prior, model, RiskSpec{side, 1.0}, config).scores;
            for (int i = 0; i < n; ++i) {
                CHECK(scores[static_cast<std::size_t>(i)] ==
                      doctest::Approx(robust[static_cast<std::size_t>(i)]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("point-mass deletions make every side the plain semivalue") {
    const auto game = make_random_game(4, 41);
    const auto model = DeletionModel::independent({1, 1, 1, 1});
    const auto prior = SemivaluePrior::beta_family(4, 2);
    const auto plain = exact_semivalue(game, prior);
    EstimatorConfig config;
    for (const double alpha : {0.2, 0.7, 1.0}) {
        for (const RiskSide side : {RiskSide::Averse, RiskSide::Seeking}) {
            const auto scores =
                risk_derdava(game, prior, model, RiskSpec{side, alpha}, config).scores;
            for (int i = 0; i < 4; ++i) {
                CHECK(scores[static_cast<std::size_t>(i)] ==
                      doctest::Approx(plain[static_cast<std::size_t>(i)]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("risk-averse fixture rewards the certain stayer harder") {
    // hand-enumerated coalition tails at alpha = 0.3: the risk game is
    // (0, 0.5, 0, 0.5) so the scores land at exactly (0.5, 0)
    EstimatorConfig config;
    const auto averse = risk_derdava(fixture_game(), SemivaluePrior::shapley(), fixture_model(),
                                     RiskSpec{RiskSide::Averse, 0.3}, config);
    CHECK(averse.scores[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(averse.scores[1] == doctest::Approx(0.0).epsilon(1e-12));

    const auto robust =
        exact_derdava(fixture_game(), SemivaluePrior::shapley(), fixture_model());
    CHECK(averse.scores[0] > averse.scores[1]);
    CHECK(averse.scores[0] >= robust.scores[0] - 1e-12);
}

TEST_CASE("neutral side reproduces the deletion-robust scores at any alpha") {
    const auto game = make_random_game(5, 606);
    const auto model = DeletionModel::independent({0.9, 0.7, 0.5, 0.3, 1.0});
    EstimatorConfig config;
    const auto robust = exact_derdava(game, SemivaluePrior::shapley(), model).scores;
    const auto neutral = risk_derdava(game, SemivaluePrior::shapley(), model,
                                      RiskSpec{RiskSide::Neutral, 0.2}, config)
                             .scores;
    for (int i = 0; i < 5; ++i) {
        CHECK(neutral[static_cast<std::size_t>(i)] ==
              doctest::Approx(robust[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("averse scoring penalizes likely quitters against the neutral line") {
    // interchangeable utilities, staying probability decreasing in index
    const int n = 4;
    std::vector<double> table(1ULL << n);
    for (std::uint64_t m = 0; m < table.size(); ++m) {
        table[m] = std::sqrt(static_cast<double>(Coalition{m}.size()) / n);
    }
    const auto game = make_table_game(n, std::move(table));
    const auto model = DeletionModel::independent({1.0, 0.8, 0.6, 0.4});
    EstimatorConfig config;
    const auto neutral = exact_derdava(game, SemivaluePrior::shapley(), model).scores;
    const auto averse = risk_derdava(game, SemivaluePrior::shapley(), model,
                                     RiskSpec{RiskSide::Averse, 0.4}, config)
                            .scores;
    CHECK(averse[0] >= neutral[0] - 1e-12);  // the certain stayer
    CHECK(averse[3] <= neutral[3] + 1e-12);  // the likeliest quitter
}

TEST_CASE("sampled tail average approaches the split formula") {
    const auto dist =
        DiscreteDistribution::from_atoms({{1.0, 0.2}, {2.0, 0.3}, {3.0, 0.5}});
    Rng rng(99);
    std::vector<double> samples;
    samples.reserve(200000);
    for (int t = 0; t < 200000; ++t) {
        const double u = rng.uniform01();
        samples.push_back(u < 0.2 ? 1.0 : (u < 0.5 ? 2.0 : 3.0));
    }
    CHECK(std::abs(mc_cvar(samples, 0.6, RiskSide::Averse) - 11.0 / 6.0) < 0.01);
    CHECK(std::abs(mc_cvar(samples, 0.5, RiskSide::Seeking) - 3.0) < 0.01);
    CHECK(std::abs(mc_cvar(samples, 1.0, RiskSide::Neutral) - dist.mean()) < 0.01);
    CHECK_THROWS_AS(mc_cvar({}, 0.5, RiskSide::Averse), std::invalid_argument);
}

TEST_CASE("estimator mode agrees with exact on a small instance") {
    const auto game = make_random_monotone_game(4, 2024);
    const auto model = DeletionModel::independent({0.9, 0.8, 0.6, 0.5});
    const auto prior = SemivaluePrior::shapley();
    const RiskSpec spec{RiskSide::Averse, 0.5};
    EstimatorConfig config;
    config.seed = 77;
    config.max_samples = 400000;
    config.cvar_samples = 1024;
    const auto exact = risk_derdava(game, prior, model, spec, config, RiskMode::Exact);
    const auto sampled = risk_derdava(game, prior, model, spec, config, RiskMode::Estimate);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(sampled.scores[static_cast<std::size_t>(i)] -
                       exact.scores[static_cast<std::size_t>(i)]) < 0.05);
    }
}

TEST_CASE("alpha validation and guards") {
    EstimatorConfig config;
    CHECK_THROWS_AS(risk_derdava(fixture_game(), SemivaluePrior::shapley(), fixture_model(),
                                 RiskSpec{RiskSide::Averse, 0.0}, config),
                    std::invalid_argument);
    auto utility = [](Coalition s) { return static_cast<double>(s.size()); };
    const CooperativeGame big(14, utility, UtilityRange{0, 14});
    const auto model = DeletionModel::independent(std::vector<double>(14, 0.5));
    CHECK_THROWS_AS(risk_derdava(big, SemivaluePrior::shapley(), model,
                                 RiskSpec{RiskSide::Averse, 0.5}, config, RiskMode::Exact),
                    guard_error);
}

TEST_SUITE_END();
