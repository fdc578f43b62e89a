#include "doctest.h"

#include <cmath>
#include <map>

#include "delval/deletion_model.hpp"
#include "delval/errors.hpp"
#include "delval/numeric.hpp"

using namespace delval;

TEST_SUITE_BEGIN("deletion_model");

TEST_CASE("independent pmf multiplies staying factors") {
    const auto model = DeletionModel::independent({1.0, 0.7});
    CHECK(model.pmf(Coalition::of({0, 1})) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(model.pmf(Coalition::of({1})) == doctest::Approx(0.0));  // source 0 never quits
    CHECK(model.pmf(Coalition::of({0})) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(model.pmf(Coalition::empty_set()) == doctest::Approx(0.0));
}

TEST_CASE("size-weighted pmf divides mass evenly within a size") {
    const auto point = DeletionModel::size_weighted({0, 0, 0, 1});
    CHECK(point.pmf(Coalition::of({0, 1, 2})) == doctest::Approx(1.0));
    CHECK(point.pmf(Coalition::of({0})) == doctest::Approx(0.0));

    const auto spread = DeletionModel::size_weighted({0.2, 0.3, 0.5});
    CHECK(spread.pmf(Coalition::empty_set()) == doctest::Approx(0.2));
    CHECK(spread.pmf(Coalition::of({0})) == doctest::Approx(0.15));
    CHECK(spread.pmf(Coalition::of({1})) == doctest::Approx(0.15));
    CHECK(spread.pmf(Coalition::of({0, 1})) == doctest::Approx(0.5));
}

TEST_CASE("marginal staying probabilities") {
    const auto independent = DeletionModel::independent({0.5, 0.9});
    CHECK(independent.marginal_staying_probability(1) == doctest::Approx(0.9));

    const auto categorical = DeletionModel::categorical(
        1, {{Coalition::empty_set(), 0.3}, {Coalition::of({0}), 0.7}});
    CHECK(categorical.marginal_staying_probability(0) == doctest::Approx(0.7));

    const auto sized = DeletionModel::size_weighted({0, 1, 0});
    CHECK(sized.marginal_staying_probability(0) == doctest::Approx(0.5));
    CHECK(sized.marginal_staying_probability(1) == doctest::Approx(0.5));
}

TEST_CASE("degenerate samplers") {
    Rng rng(1);
    const auto all = DeletionModel::independent({1, 1, 1});
    const auto none = DeletionModel::independent({0, 0, 0});
    for (int t = 0; t < 50; ++t) {
        CHECK(all.sample(rng) == Coalition::of({0, 1, 2}));
        CHECK(none.sample(rng) == Coalition::empty_set());
    }
}

TEST_CASE("empirical inclusion frequency tracks the staying probability") {
    const auto model = DeletionModel::independent({0.7, 0.7, 0.7});
    Rng rng(17);
    const int draws = 100000;
    std::vector<int> hits(3, 0);
    for (int t = 0; t < draws; ++t) {
        const auto d = model.sample(rng);
        for (int i = 0; i < 3; ++i) {
            if (d.contains(i)) hits[static_cast<std::size_t>(i)]++;
        }
    }
    for (int i = 0; i < 3; ++i) {
        const double freq = hits[static_cast<std::size_t>(i)] / static_cast<double>(draws);
        CHECK(std::abs(freq - 0.7) < 0.01);
    }
}

TEST_CASE("support enumeration sums to one and matches named atoms") {
    const auto fixture = DeletionModel::independent({1.0, 0.7});
    const auto support = fixture.enumerate_support();
    REQUIRE(support.size() == 2);
    CHECK(support[0].first == Coalition::of({0}));
    CHECK(support[0].second == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(support[1].first == Coalition::of({0, 1}));
    CHECK(support[1].second == doctest::Approx(0.7).epsilon(1e-15));

    const std::vector<DeletionModel> models = {
        DeletionModel::independent({0.2, 0.9, 0.55, 0.7}),
        DeletionModel::size_weighted({0.1, 0.2, 0.3, 0.25, 0.15}),
        DeletionModel::categorical(3, {{Coalition::of({0}), 0.25},
                                       {Coalition::of({1, 2}), 0.25},
                                       {Coalition::of({0, 1, 2}), 0.5}}),
        DeletionModel::beta_bernoulli({2, 5, 1}, {3, 1, 4}),
    };
    for (const auto& model : models) {
        KahanSum total;
        for (const auto& [subset, prob] : model.enumerate_support()) {
            CHECK(prob > 0.0);
            total.add(prob);
        }
        CHECK(std::abs(total.value() - 1.0) <= 1e-9);
        // marginals agree with the enumerated support
        for (int i = 0; i < model.num_sources(); ++i) {
            KahanSum included;
            for (const auto& [subset, prob] : model.enumerate_support()) {
                if (subset.contains(i)) included.add(prob);
            }
            CHECK(model.marginal_staying_probability(i) ==
                  doctest::Approx(included.value()).epsilon(1e-9));
        }
    }
}

TEST_CASE("categorical echoes its table and closes the world") {
    const auto model = DeletionModel::categorical(
        2, {{Coalition::of({0}), 0.4}, {Coalition::of({0, 1}), 0.6}});
    const auto support = model.enumerate_support();
    REQUIRE(support.size() == 2);
    CHECK(model.pmf(Coalition::empty_set()) == 0.0);
    CHECK(model.pmf(Coalition::of({1})) == 0.0);
}

TEST_CASE("sampler matches the enumerated pmf") {
    const auto models = {
        DeletionModel::independent({0.3, 0.8, 0.6}),
        DeletionModel::size_weighted({0.1, 0.4, 0.3, 0.2}),
        DeletionModel::categorical(3, {{Coalition::of({0}), 0.2},
                                       {Coalition::of({2}), 0.3},
                                       {Coalition::of({0, 1, 2}), 0.5}}),
        DeletionModel::beta_bernoulli({4, 2, 6}, {2, 2, 3}),
    };
    int seed = 100;
    for (const auto& model : models) {
        Rng rng(seed++);
        const int draws = 100000;
        std::map<std::uint64_t, int> counts;
        for (int t = 0; t < draws; ++t) counts[model.sample(rng).bits]++;
        for (const auto& [subset, prob] : model.enumerate_support()) {
            const double freq = counts[subset.bits] / static_cast<double>(draws);
            const double bound = 3.0 * std::sqrt(prob * (1.0 - prob) / draws) + 1e-9;
            CHECK(std::abs(freq - prob) <= bound);
        }
    }
}

TEST_CASE("construction validates probabilities") {
    CHECK_THROWS_AS(DeletionModel::independent({1.2}), std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::independent({-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::categorical(2, {{Coalition::of({0}), 0.5},
                                                   {Coalition::of({1}), 0.2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::categorical(2, {{Coalition::of({0}), 1.2},
                                                   {Coalition::of({1}), -0.2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::categorical(1, {{Coalition::of({0}), 0.5},
                                                   {Coalition::of({0}), 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::size_weighted({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(DeletionModel::beta_bernoulli({1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("uncertain staying probabilities integrate to their mean") {
    // Beta(4, 4) encodes an expected staying probability of one half
    const auto model = DeletionModel::beta_bernoulli({4, 8}, {4, 2});
    CHECK(model.marginal_staying_probability(0) == doctest::Approx(0.5));
    CHECK(model.marginal_staying_probability(1) == doctest::Approx(0.8));
    CHECK(model.pmf(Coalition::of({0, 1})) == doctest::Approx(0.4));
    CHECK(model.pmf(Coalition::of({1})) == doctest::Approx(0.4));

    // two-stage sampling still hits the compound marginals
    Rng rng(22);
    const int draws = 100000;
    std::vector<int> hits(2, 0);
    for (int t = 0; t < draws; ++t) {
        const auto d = model.sample(rng);
        for (int i = 0; i < 2; ++i) {
            if (d.contains(i)) hits[static_cast<std::size_t>(i)]++;
        }
    }
    CHECK(std::abs(hits[0] / static_cast<double>(draws) - 0.5) < 0.01);
    CHECK(std::abs(hits[1] / static_cast<double>(draws) - 0.8) < 0.01);
}

TEST_CASE("enumeration guard on wide supports") {
    const auto model = DeletionModel::independent(std::vector<double>(21, 0.5));
    CHECK_FALSE(model.support_enumerable());
    CHECK_THROWS_AS(model.enumerate_support(), guard_error);
}

TEST_SUITE_END();
