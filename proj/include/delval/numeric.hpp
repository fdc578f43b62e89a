#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace delval {

// Kahan-compensated accumulator. Order-sensitive sums in the valuation and
// experiment paths use this so that results stay stable at 1e-12 tolerances.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Welford running mean/variance; merging in a fixed order is deterministic.
struct RunningStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    void merge(const RunningStats& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const std::int64_t total = count + o.count;
        mean += d * static_cast<double>(o.count) / static_cast<double>(total);
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) /
                         static_cast<double>(total);
        count = total;
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

// Cached Pascal triangle. Rows are exact integers as long as they fit a
// double's 53-bit mantissa, which covers every exact-enumeration regime.
const std::vector<double>& pascal_row(int n);

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return pascal_row(n)[static_cast<std::size_t>(k)];
}

// log C(n, k) via lgamma, for weight computations at estimator-scale n.
double log_binomial(int n, int k);

// log Beta(a, b)
inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double mean_of(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // unbiased, 0 if size < 2

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace delval
