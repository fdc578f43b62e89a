#include "delval/numeric.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace delval {

namespace {
std::vector<std::vector<double>> g_pascal{{1.0}};
std::mutex g_pascal_mutex;
}  // namespace

const std::vector<double>& pascal_row(int n) {
    if (n < 0) throw std::invalid_argument("pascal_row: negative n");
    std::lock_guard<std::mutex> lock(g_pascal_mutex);
    while (static_cast<int>(g_pascal.size()) <= n) {
        const auto& prev = g_pascal.back();
        std::vector<double> row(prev.size() + 1, 1.0);
        for (std::size_t k = 1; k + 1 < row.size(); ++k) {
            row[k] = prev[k - 1] + prev[k];
        }
        g_pascal.push_back(std::move(row));
    }
    return g_pascal[static_cast<std::size_t>(n)];
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    KahanSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

namespace {
std::vector<double> average_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}
}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("spearman: need two equal-length series of size >= 2");
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double mx = mean_of(rx);
    const double my = mean_of(ry);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

}  // namespace delval
