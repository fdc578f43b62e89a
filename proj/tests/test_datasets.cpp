#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "delval/datasets.hpp"
#include "delval/errors.hpp"
#include "delval/rng.hpp"

using namespace delval;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& contents) {
        static int counter = 0;
        path = (std::filesystem::temp_directory_path() /
                ("delval_test_" + std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream out(path);
        out << contents;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

std::string make_rows(int count) {
    std::string text = "x,y,label\n";
    Rng rng(1);
    for (int r = 0; r < count; ++r) {
        const int cls = static_cast<int>(rng.below(2));
        text += std::to_string(rng.uniform01()) + "," + std::to_string(cls + rng.uniform01()) +
                "," + (cls == 0 ? "neg" : "pos") + "\n";
    }
    return text;
}

}  // namespace

TEST_SUITE_BEGIN("datasets");

TEST_CASE("csv split sizes and determinism") {
    const TempCsv file(make_rows(100));
    auto [train, val] = ingest_csv(file.path, "label", 7, 0.2);
    CHECK(train.num_rows() == 80);
    CHECK(val.num_rows() == 20);
    CHECK(train.feature_names == std::vector<std::string>{"x", "y"});

    auto [train2, val2] = ingest_csv(file.path, "label", 7, 0.2);
    CHECK(train.features == train2.features);
    CHECK(train.labels == train2.labels);
    CHECK(val.features == val2.features);

    auto [train3, val3] = ingest_csv(file.path, "label", 8, 0.2);
    CHECK(train.features != train3.features);  // a different seed reshuffles
}

TEST_CASE("unparseable rows are rejected and counted") {
    std::string text = "a,b,label\n1,2,x\n1,oops,y\n3,4,x\n,2,y\n5,6,?\n5,,x\n";
    const TempCsv file(text);
    CsvIngestReport report;
    auto [train, val] = ingest_csv(file.path, "label", 1, 0.0, &report);
    CHECK(report.rows_read == 6);
    CHECK(report.rows_rejected == 3);
    CHECK(train.num_rows() == 3);
    CHECK(val.num_rows() == 0);
}

TEST_CASE("labels map densely in first-seen order") {
    const TempCsv file("f,label\n1,carol\n2,alice\n3,carol\n4,bob\n");
    auto [train, val] = ingest_csv(file.path, "label", 1, 0.0);
    // pre-shuffle file order decides the ids: carol=0, alice=1, bob=2
    std::multiset<int> labels(train.labels.begin(), train.labels.end());
    CHECK(labels == std::multiset<int>{0, 0, 1, 2});
    CHECK(train.num_classes() == 3);
}

TEST_CASE("quoted fields parse") {
    const TempCsv file("\"a\",\"label\"\n\"1.5\",\"yes\"\n\"2.5\",\"no\"\n");
    auto [train, val] = ingest_csv(file.path, "label", 1, 0.0);
    REQUIRE(train.num_rows() == 2);
    // rows arrive shuffled; check the value set instead of the order
    std::multiset<double> values{train.features[0][0], train.features[1][0]};
    CHECK(values == std::multiset<double>{1.5, 2.5});
}

TEST_CASE("schema errors") {
    const TempCsv file(make_rows(5));
    CHECK_THROWS_AS(ingest_csv(file.path, "missing_column", 1, 0.2), config_error);
    CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv", "label", 1, 0.2), config_error);
    CHECK_THROWS_AS(ingest_csv(file.path, "label", 1, 1.0), config_error);
}

TEST_CASE("equal random partition covers every row evenly") {
    const auto partition = equal_random_partition(103, 5, 9);
    REQUIRE(partition.assignment.size() == 103);
    std::vector<int> counts(5, 0);
    for (int src : partition.assignment) {
        REQUIRE(src >= 0);
        REQUIRE(src < 5);
        counts[static_cast<std::size_t>(src)]++;
    }
    for (int c : counts) CHECK(std::abs(c - 103 / 5) <= 1);
    CHECK(partition.assignment == equal_random_partition(103, 5, 9).assignment);
}

TEST_CASE("partition file round trip") {
    std::string text = "row_index,source_id\n";
    for (int r = 0; r < 10; ++r) {
        text += std::to_string(r) + "," + std::to_string(r % 3) + "\n";
    }
    const TempCsv file(text);
    const auto partition = partition_from_csv(file.path, 10);
    CHECK(partition.num_sources == 3);
    CHECK(partition.assignment[4] == 1);

    const TempCsv incomplete("row_index,source_id\n0,0\n");
    CHECK_THROWS_AS(partition_from_csv(incomplete.path, 2), config_error);
}

TEST_CASE("model kind validation") {
    CHECK_THROWS_AS(ModelKind::knn(2), std::invalid_argument);
    CHECK_THROWS_AS(ModelKind::knn(0), std::invalid_argument);
    CHECK(ModelKind::knn(3).name() == "knn(k=3)");
}

TEST_CASE("nearest neighbour is perfect on the separable fixture") {
    const auto fixture = make_synthetic_similarity_dataset(3);
    const auto game = build_utility(fixture.train, fixture.validation, fixture.partition,
                                    ModelKind::knn(1));
    CHECK(game.evaluate(game.support()) == doctest::Approx(1.0));
    CHECK(game.utility_range().lo == 0.0);
    CHECK(game.utility_range().hi == 1.0);
}

TEST_CASE("empty coalitions predict the validation majority") {
    const auto fixture = make_synthetic_similarity_dataset(4);
    const auto game = build_utility(fixture.train, fixture.validation, fixture.partition,
                                    ModelKind::knn(1));
    // ties go to the smallest label: 33 of 99 validation rows
    CHECK(game.evaluate(Coalition::empty_set()) == doctest::Approx(1.0 / 3));
}

TEST_CASE("duplicated source contributes nothing next to its twin") {
    const auto fixture = make_synthetic_similarity_dataset(5);
    // identical point sets by construction
    const int shared = SyntheticSimilarity::kShared;
    const int copy = SyntheticSimilarity::kSharedCopy;
    std::vector<std::vector<double>> shared_rows, copy_rows;
    for (std::size_t r = 0; r < fixture.train.num_rows(); ++r) {
        if (fixture.partition.assignment[r] == shared) {
            shared_rows.push_back(fixture.train.features[r]);
        }
        if (fixture.partition.assignment[r] == copy) {
            copy_rows.push_back(fixture.train.features[r]);
        }
    }
    CHECK(shared_rows == copy_rows);

    const auto game = build_utility(fixture.train, fixture.validation, fixture.partition,
                                    ModelKind::knn(1));
    for_each_subset(game.support().without(shared).bits, [&](Coalition s) {
        if (s.contains(copy)) {
            CHECK(std::abs(game.marginal_contribution(shared, s)) <= 1e-12);
        }
    });
}

TEST_CASE("clean similarity utility is monotone by enumeration") {
    const auto fixture = make_synthetic_similarity_dataset(6);
    const auto game = build_utility(fixture.train, fixture.validation, fixture.partition,
                                    ModelKind::knn(1));
    for (std::uint64_t m = 0; m < 16; ++m) {
        for (int i = 0; i < 4; ++i) {
            if (!(m >> i & 1)) {
                CHECK(game.marginal_contribution(i, Coalition{m}) >= 0.0);
            }
        }
    }
}

TEST_CASE("gaussian naive bayes handles single-class coalitions") {
    const auto blobs = make_two_class_blobs(4, 10, 60, 12);
    const auto game =
        build_utility(blobs.train, blobs.validation, blobs.partition, ModelKind::gaussian_nb());
    // every singleton trains on whatever classes it owns; no throw, in range
    for (int i = 0; i < 4; ++i) {
        const double v = game.evaluate(Coalition::of({i}));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(game.evaluate(game.support()) > 0.8);  // blobs are well separated
}

TEST_CASE("label noise flips follow the per-source rates") {
    const auto blobs = make_two_class_blobs(2, 500, 10, 5);
    SUBCASE("rate zero leaves everything alone") {
        const auto noisy = add_label_noise(blobs.train, {0.0, 0.0}, blobs.partition, 3);
        CHECK(noisy.labels == blobs.train.labels);
    }
    SUBCASE("rate one flips every binary label of that source") {
        const auto noisy = add_label_noise(blobs.train, {1.0, 0.0}, blobs.partition, 3);
        for (std::size_t r = 0; r < noisy.num_rows(); ++r) {
            if (blobs.partition.assignment[r] == 0) {
                CHECK(noisy.labels[r] == 1 - blobs.train.labels[r]);
            } else {
                CHECK(noisy.labels[r] == blobs.train.labels[r]);
            }
        }
    }
    SUBCASE("intermediate rates land in the binomial band") {
        const auto noisy = add_label_noise(blobs.train, {0.3, 0.0}, blobs.partition, 3);
        int flips = 0;
        for (std::size_t r = 0; r < noisy.num_rows(); ++r) {
            if (noisy.labels[r] != blobs.train.labels[r]) ++flips;
        }
        // 500 rows at rate 0.3: 150 +- 3 * sqrt(500 * 0.3 * 0.7) ~ 150 +- 31
        CHECK(flips > 150 - 31);
        CHECK(flips < 150 + 31);
    }
    SUBCASE("rates are validated") {
        CHECK_THROWS_AS(add_label_noise(blobs.train, {1.5, 0.0}, blobs.partition, 3),
                        std::invalid_argument);
        CHECK_THROWS_AS(add_label_noise(blobs.train, {0.5}, blobs.partition, 3),
                        std::invalid_argument);
    }
}

TEST_CASE("utility oracles are deterministic across builds") {
    const auto blobs = make_two_class_blobs(4, 12, 40, 21);
    const auto g1 =
        build_utility(blobs.train, blobs.validation, blobs.partition, ModelKind::knn(3));
    const auto g2 =
        build_utility(blobs.train, blobs.validation, blobs.partition, ModelKind::knn(3));
    for (std::uint64_t m = 0; m < 16; ++m) {
        CHECK(g1.evaluate(Coalition{m}) == g2.evaluate(Coalition{m}));
    }
}

TEST_SUITE_END();
