#include "delval/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/rng.hpp"

namespace delval {

namespace {

// RFC-4180-style field splitting: quoted fields may contain commas and
// doubled quotes. No embedded newlines (rows are line-based here).
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_real(const std::string& text, double& out) {
    if (text.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(text, &pos);
    } catch (...) {
        return false;
    }
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    return pos == text.size();
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed({0x73706C6974ULL, seed}));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

int majority_label(const std::vector<int>& labels, int num_classes) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)]++;
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

struct Standardizer {
    std::vector<double> mean, scale;

    static Standardizer fit(const Dataset& data) {
        Standardizer s;
        if (data.num_rows() == 0) return s;
        const std::size_t dims = data.features[0].size();
        s.mean.assign(dims, 0.0);
        s.scale.assign(dims, 1.0);
        for (const auto& row : data.features) {
            for (std::size_t d = 0; d < dims; ++d) s.mean[d] += row[d];
        }
        for (auto& m : s.mean) m /= static_cast<double>(data.num_rows());
        std::vector<double> var(dims, 0.0);
        for (const auto& row : data.features) {
            for (std::size_t d = 0; d < dims; ++d) {
                var[d] += (row[d] - s.mean[d]) * (row[d] - s.mean[d]);
            }
        }
        for (std::size_t d = 0; d < dims; ++d) {
            const double sd = std::sqrt(var[d] / static_cast<double>(data.num_rows()));
            s.scale[d] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (std::size_t d = 0; d < row.size(); ++d) out[d] = (row[d] - mean[d]) / scale[d];
        return out;
    }
};

int knn_predict(const std::vector<std::vector<double>>& train_x, const std::vector<int>& train_y,
                const std::vector<double>& x, int k, int num_classes) {
    const int usable = std::min<int>(k, static_cast<int>(train_x.size()));
    // (distance^2, row index); index tie-break keeps predictions stable
    std::vector<std::pair<double, std::size_t>> order(train_x.size());
    for (std::size_t r = 0; r < train_x.size(); ++r) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double diff = train_x[r][d] - x[d];
            d2 += diff * diff;
        }
        order[r] = {d2, r};
    }
    std::partial_sort(order.begin(), order.begin() + usable, order.end());
    std::vector<int> votes(static_cast<std::size_t>(num_classes), 0);
    for (int t = 0; t < usable; ++t) {
        votes[static_cast<std::size_t>(train_y[order[static_cast<std::size_t>(t)].second])]++;
    }
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

struct GaussianNb {
    // per class: prior and feature-wise mean / variance (floored)
    std::vector<double> log_prior;
    std::vector<std::vector<double>> mean, var;
    std::vector<bool> present;

    static GaussianNb fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          int num_classes) {
        constexpr double kVarianceFloor = 1e-9;
        GaussianNb nb;
        const std::size_t dims = x.empty() ? 0 : x[0].size();
        nb.log_prior.assign(static_cast<std::size_t>(num_classes), 0.0);
        nb.mean.assign(static_cast<std::size_t>(num_classes), std::vector<double>(dims, 0.0));
        nb.var.assign(static_cast<std::size_t>(num_classes), std::vector<double>(dims, 0.0));
        nb.present.assign(static_cast<std::size_t>(num_classes), false);
        std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t r = 0; r < x.size(); ++r) {
            const auto c = static_cast<std::size_t>(y[r]);
            counts[c]++;
            for (std::size_t d = 0; d < dims; ++d) nb.mean[c][d] += x[r][d];
        }
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] == 0) continue;
            nb.present[c] = true;
            for (auto& m : nb.mean[c]) m /= static_cast<double>(counts[c]);
            nb.log_prior[c] =
                std::log(static_cast<double>(counts[c]) / static_cast<double>(x.size()));
        }
        for (std::size_t r = 0; r < x.size(); ++r) {
            const auto c = static_cast<std::size_t>(y[r]);
            for (std::size_t d = 0; d < dims; ++d) {
                const double diff = x[r][d] - nb.mean[c][d];
                nb.var[c][d] += diff * diff;
            }
        }
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (!nb.present[c]) continue;
            for (auto& v : nb.var[c]) {
                v = std::max(v / static_cast<double>(counts[c]), kVarianceFloor);
            }
        }
        return nb;
    }

    int predict(const std::vector<double>& x) const {
        // classes absent from the fit keep zero posterior
        int best = -1;
        double best_score = 0.0;
        for (std::size_t c = 0; c < present.size(); ++c) {
            if (!present[c]) continue;
            double score = log_prior[c];
            for (std::size_t d = 0; d < x.size(); ++d) {
                const double diff = x[d] - mean[c][d];
                score += -0.5 * std::log(2.0 * M_PI * var[c][d]) - diff * diff / (2.0 * var[c][d]);
            }
            if (best < 0 || score > best_score) {
                best = static_cast<int>(c);
                best_score = score;
            }
        }
        return best < 0 ? 0 : best;
    }
};

}  // namespace

int Dataset::num_classes() const {
    int top = 0;
    for (int y : labels) top = std::max(top, y + 1);
    return top;
}

std::pair<Dataset, Dataset> ingest_csv(const std::string& path, const std::string& label_column,
                                       std::uint64_t seed, double val_fraction,
                                       CsvIngestReport* report) {
    if (!(val_fraction >= 0.0) || !(val_fraction < 1.0)) {
        throw config_error("ingest_csv: val_fraction must be in [0, 1)");
    }
    std::ifstream in(path);
    if (!in) throw config_error("ingest_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw config_error("ingest_csv: empty file " + path);
    const auto header = split_csv_line(line);
    std::ptrdiff_t label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = static_cast<std::ptrdiff_t>(i);
    }
    if (label_idx < 0) {
        throw config_error("ingest_csv: label column '" + label_column + "' not found in " + path);
    }

    Dataset all;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) != label_idx) all.feature_names.push_back(header[i]);
    }
    std::map<std::string, int> label_ids;  // dense ids in first-seen order
    CsvIngestReport local;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++local.rows_read;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            ++local.rows_rejected;
            continue;
        }
        std::vector<double> row;
        row.reserve(header.size() - 1);
        bool ok = true;
        for (std::size_t i = 0; i < fields.size() && ok; ++i) {
            if (static_cast<std::ptrdiff_t>(i) == label_idx) continue;
            double value = 0.0;
            if (!parse_real(fields[i], value)) {
                ok = false;
            } else {
                row.push_back(value);
            }
        }
        const auto& label_text = fields[static_cast<std::size_t>(label_idx)];
        if (!ok || label_text.empty()) {
            ++local.rows_rejected;
            continue;
        }
        auto [it, inserted] =
            label_ids.emplace(label_text, static_cast<int>(label_ids.size()));
        all.features.push_back(std::move(row));
        all.labels.push_back(it->second);
    }
    if (report) *report = local;
    if (all.num_rows() == 0) throw config_error("ingest_csv: no usable rows in " + path);

    const auto order = shuffled_indices(all.num_rows(), seed);
    const auto n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(all.num_rows())));
    Dataset train, val;
    train.feature_names = val.feature_names = all.feature_names;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        Dataset& dst = pos < n_val ? val : train;
        dst.features.push_back(all.features[order[pos]]);
        dst.labels.push_back(all.labels[order[pos]]);
    }
    return {std::move(train), std::move(val)};
}

SourcePartition equal_random_partition(std::size_t num_rows, int num_sources,
                                       std::uint64_t seed) {
    if (num_sources < 1) throw std::invalid_argument("equal_random_partition: num_sources >= 1");
    SourcePartition p;
    p.num_sources = num_sources;
    p.assignment.resize(num_rows);
    const auto order = shuffled_indices(num_rows, derive_seed({0x70617274ULL, seed}));
    for (std::size_t pos = 0; pos < num_rows; ++pos) {
        p.assignment[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(num_sources));
    }
    return p;
}

SourcePartition partition_from_csv(const std::string& path, std::size_t num_rows) {
    std::ifstream in(path);
    if (!in) throw config_error("partition_from_csv: cannot open " + path);
    SourcePartition p;
    p.assignment.assign(num_rows, -1);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw config_error("partition_from_csv: line " + std::to_string(line_no) +
                               ": expected 'row_index,source_id'");
        }
        double row_d = 0.0, src_d = 0.0;
        if (!parse_real(fields[0], row_d)) {
            if (line_no == 1) continue;  // header
            throw config_error("partition_from_csv: line " + std::to_string(line_no) +
                               ": bad row index");
        }
        if (!parse_real(fields[1], src_d)) {
            throw config_error("partition_from_csv: line " + std::to_string(line_no) +
                               ": bad source id");
        }
        const auto row = static_cast<std::size_t>(row_d);
        const int src = static_cast<int>(src_d);
        if (row >= num_rows || src < 0) {
            throw config_error("partition_from_csv: line " + std::to_string(line_no) +
                               ": row or source out of range");
        }
        p.assignment[row] = src;
        p.num_sources = std::max(p.num_sources, src + 1);
    }
    for (std::size_t r = 0; r < num_rows; ++r) {
        if (p.assignment[r] < 0) {
            throw config_error("partition_from_csv: row " + std::to_string(r) + " unassigned");
        }
    }
    return p;
}

ModelKind ModelKind::knn(int k) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("knn: k must be odd and >= 1");
    return ModelKind{Kind::Knn, k};
}

std::string ModelKind::name() const {
    return kind == Kind::Knn ? "knn(k=" + std::to_string(k) + ")" : "gaussian_nb";
}

CooperativeGame build_utility(const Dataset& train, const Dataset& validation,
                              const SourcePartition& partition, ModelKind kind) {
    if (partition.assignment.size() != train.num_rows()) {
        throw std::invalid_argument("build_utility: partition does not cover the training rows");
    }
    if (validation.num_rows() == 0) throw std::invalid_argument("build_utility: empty validation");
    const int n = partition.num_sources;
    const int num_classes = std::max(train.num_classes(), validation.num_classes());

    const Standardizer stats = Standardizer::fit(train);
    auto train_x = std::make_shared<std::vector<std::vector<double>>>();
    train_x->reserve(train.num_rows());
    for (const auto& row : train.features) train_x->push_back(stats.apply(row));
    auto val_x = std::make_shared<std::vector<std::vector<double>>>();
    val_x->reserve(validation.num_rows());
    for (const auto& row : validation.features) val_x->push_back(stats.apply(row));

    auto rows_by_source = std::make_shared<std::vector<std::vector<std::size_t>>>(
        static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < train.num_rows(); ++r) {
        (*rows_by_source)[static_cast<std::size_t>(partition.assignment[r])].push_back(r);
    }
    auto train_y = std::make_shared<std::vector<int>>(train.labels);
    auto val_y = std::make_shared<std::vector<int>>(validation.labels);
    const int baseline = majority_label(*val_y, num_classes);

    auto utility = [=](Coalition s) {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int i : s.members()) {
            for (std::size_t r : (*rows_by_source)[static_cast<std::size_t>(i)]) {
                x.push_back((*train_x)[r]);
                y.push_back((*train_y)[r]);
            }
        }
        std::size_t correct = 0;
        if (x.empty()) {
            for (int label : *val_y) {
                if (label == baseline) ++correct;
            }
        } else if (kind.kind == ModelKind::Kind::Knn) {
            for (std::size_t v = 0; v < val_x->size(); ++v) {
                if (knn_predict(x, y, (*val_x)[v], kind.k, num_classes) == (*val_y)[v]) ++correct;
            }
        } else {
            const GaussianNb nb = GaussianNb::fit(x, y, num_classes);
            for (std::size_t v = 0; v < val_x->size(); ++v) {
                if (nb.predict((*val_x)[v]) == (*val_y)[v]) ++correct;
            }
        }
        return static_cast<double>(correct) / static_cast<double>(val_y->size());
    };
    return CooperativeGame(n, std::move(utility), UtilityRange{0.0, 1.0});
}

namespace {

// Gaussian draw clipped to a radius so clusters cannot overlap.
std::vector<double> clipped_gaussian_point(Rng& rng, double cx, double cy, double sigma,
                                           double max_radius) {
    for (;;) {
        const double dx = rng.normal() * sigma;
        const double dy = rng.normal() * sigma;
        if (dx * dx + dy * dy <= max_radius * max_radius) return {cx + dx, cy + dy};
    }
}

}  // namespace

SyntheticSimilarity make_synthetic_similarity_dataset(std::uint64_t seed) {
    constexpr int kPerCluster = 24;
    // equal class counts keep the majority baseline at exactly one third,
    // so singleton clusters never dip below the empty-coalition utility
    constexpr int kValPerClass[3] = {33, 33, 33};
    constexpr double kSigma = 0.4;
    constexpr double kClip = 1.2;
    const double centers[3][2] = {{0.0, 0.0}, {8.0, 0.0}, {0.0, 8.0}};

    Rng rng(derive_seed({0x73696DULL, seed}));
    SyntheticSimilarity out;
    out.train.feature_names = out.validation.feature_names = {"x", "y"};
    out.partition.num_sources = 4;

    auto add_cluster_rows = [&](int cls, int source, std::vector<std::vector<double>>* copy_to) {
        for (int t = 0; t < kPerCluster; ++t) {
            auto pt = clipped_gaussian_point(rng, centers[cls][0], centers[cls][1], kSigma, kClip);
            if (copy_to) copy_to->push_back(pt);
            out.train.features.push_back(std::move(pt));
            out.train.labels.push_back(cls);
            out.partition.assignment.push_back(source);
        }
    };
    add_cluster_rows(0, SyntheticSimilarity::kExclusiveA, nullptr);
    add_cluster_rows(1, SyntheticSimilarity::kExclusiveB, nullptr);
    std::vector<std::vector<double>> shared_rows;
    add_cluster_rows(2, SyntheticSimilarity::kShared, &shared_rows);
    // the copy owns the identical point set
    for (const auto& pt : shared_rows) {
        out.train.features.push_back(pt);
        out.train.labels.push_back(2);
        out.partition.assignment.push_back(SyntheticSimilarity::kSharedCopy);
    }
    for (int cls = 0; cls < 3; ++cls) {
        for (int t = 0; t < kValPerClass[cls]; ++t) {
            out.validation.features.push_back(
                clipped_gaussian_point(rng, centers[cls][0], centers[cls][1], kSigma, kClip));
            out.validation.labels.push_back(cls);
        }
    }
    return out;
}

Dataset add_label_noise(const Dataset& dataset, const std::vector<double>& rate_per_source,
                        const SourcePartition& partition, std::uint64_t seed) {
    if (partition.assignment.size() != dataset.num_rows()) {
        throw std::invalid_argument("add_label_noise: partition does not cover the rows");
    }
    if (static_cast<int>(rate_per_source.size()) != partition.num_sources) {
        throw std::invalid_argument("add_label_noise: need one rate per source");
    }
    for (double r : rate_per_source) {
        if (!(r >= 0.0) || !(r <= 1.0)) {
            throw std::invalid_argument("add_label_noise: rates must lie in [0, 1]");
        }
    }
    const int num_classes = dataset.num_classes();
    Dataset noisy = dataset;
    if (num_classes < 2) return noisy;
    Rng rng(derive_seed({0x6E6F697365ULL, seed}));
    for (std::size_t r = 0; r < noisy.num_rows(); ++r) {
        const double rate = rate_per_source[static_cast<std::size_t>(partition.assignment[r])];
        if (rng.bernoulli(rate)) {
            const auto shift =
                1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes - 1)));
            noisy.labels[r] = (noisy.labels[r] + shift) % num_classes;
        }
    }
    return noisy;
}

TwoClassBlobs make_two_class_blobs(int num_sources, int rows_per_source, int validation_rows,
                                   std::uint64_t seed) {
    if (num_sources < 1 || rows_per_source < 1 || validation_rows < 1) {
        throw std::invalid_argument("make_two_class_blobs: sizes must be positive");
    }
    constexpr double kSigma = 1.0;
    const double centers[2][2] = {{0.0, 0.0}, {4.0, 4.0}};
    Rng rng(derive_seed({0x626C6F62ULL, seed}));
    TwoClassBlobs out;
    out.train.feature_names = out.validation.feature_names = {"x", "y"};
    out.partition.num_sources = num_sources;
    const int total = num_sources * rows_per_source;
    for (int r = 0; r < total; ++r) {
        const int cls = static_cast<int>(rng.below(2));
        out.train.features.push_back(
            {centers[cls][0] + rng.normal() * kSigma, centers[cls][1] + rng.normal() * kSigma});
        out.train.labels.push_back(cls);
        out.partition.assignment.push_back(r % num_sources);
    }
    for (int r = 0; r < validation_rows; ++r) {
        const int cls = static_cast<int>(rng.below(2));
        out.validation.features.push_back(
            {centers[cls][0] + rng.normal() * kSigma, centers[cls][1] + rng.normal() * kSigma});
        out.validation.labels.push_back(cls);
    }
    return out;
}

}  // namespace delval
