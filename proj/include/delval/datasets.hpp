#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "delval/game.hpp"

namespace delval {

struct Dataset {
    std::vector<std::vector<double>> features;  // one row per example
    std::vector<int> labels;                    // dense ids in [0, num_classes)
    std::vector<std::string> feature_names;

    std::size_t num_rows() const { return features.size(); }
    int num_classes() const;
};

struct CsvIngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_rejected = 0;  // missing or non-numeric cells
};

// Parses a header-row CSV (quoted fields supported), maps the label column
// to dense integers in first-seen order, rejects rows with unparseable
// cells, then splits off a validation fraction after a seeded shuffle.
std::pair<Dataset, Dataset> ingest_csv(const std::string& path, const std::string& label_column,
                                       std::uint64_t seed, double val_fraction,
                                       CsvIngestReport* report = nullptr);

struct SourcePartition {
    std::vector<int> assignment;  // source id per training row
    int num_sources = 0;
};

SourcePartition equal_random_partition(std::size_t num_rows, int num_sources, std::uint64_t seed);

// CSV with rows "row_index,source_id" (header optional).
SourcePartition partition_from_csv(const std::string& path, std::size_t num_rows);

struct ModelKind {
    enum class Kind { Knn, GaussianNb };
    Kind kind = Kind::Knn;
    int k = 3;  // k-NN only; odd

    static ModelKind knn(int k);
    static ModelKind gaussian_nb() { return ModelKind{Kind::GaussianNb, 0}; }
    std::string name() const;
};

// Utility oracle: v(S) is the validation accuracy of a model fit on the
// rows owned by S's sources. v(empty) falls back to always predicting the
// validation majority class; so does any coalition owning no rows. k-NN
// distances use features standardized by the full training set.
CooperativeGame build_utility(const Dataset& train, const Dataset& validation,
                              const SourcePartition& partition, ModelKind kind);

// Three well-separated clusters, one per class, rejection-clipped so the
// nearest neighbour of every validation point lies in its own cluster.
// Four sources: two exclusive clusters plus one cluster duplicated into
// two identical sources (indices 2 and 3).
struct SyntheticSimilarity {
    Dataset train;
    Dataset validation;
    SourcePartition partition;
    static constexpr int kExclusiveA = 0;
    static constexpr int kExclusiveB = 1;
    static constexpr int kShared = 2;
    static constexpr int kSharedCopy = 3;
};

SyntheticSimilarity make_synthetic_similarity_dataset(std::uint64_t seed);

// Flips each row's label to a uniformly random other class with its
// source's rate. Deterministic in seed.
Dataset add_label_noise(const Dataset& dataset, const std::vector<double>& rate_per_source,
                        const SourcePartition& partition, std::uint64_t seed);

// Two-class Gaussian blobs split evenly across sources; the workhorse
// fixture for the data-quality and addition/removal studies.
struct TwoClassBlobs {
    Dataset train;
    Dataset validation;
    SourcePartition partition;
};

TwoClassBlobs make_two_class_blobs(int num_sources, int rows_per_source, int validation_rows,
                                   std::uint64_t seed);

}  // namespace delval
