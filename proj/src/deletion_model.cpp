#include "delval/deletion_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/numeric.hpp"

namespace delval {

namespace {

constexpr int kMaxSupportEnumeration = 20;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + ": probability outside [0, 1]");
    }
}

// Validates sum within 1e-9 of 1, then renormalizes exactly.
void normalize(std::vector<double>& probs, const char* what) {
    KahanSum total;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative probability");
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string(what) + ": probabilities sum to " +
                                    std::to_string(total.value()) + ", expected 1 within 1e-9");
    }
    for (auto& p : probs) p /= total.value();
}

std::vector<double> running_cumulative(const std::vector<double>& probs) {
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cum[i] = acc;
    }
    if (!cum.empty()) cum.back() = 1.0;
    return cum;
}

double independent_pmf(const std::vector<double>& p, Coalition d) {
    double prob = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        prob *= d.contains(static_cast<int>(i)) ? p[i] : 1.0 - p[i];
    }
    return prob;
}

Coalition sample_uniform_subset(int n, int k, Rng& rng) {
    // partial Fisher-Yates over a scratch index vector
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Coalition out;
    for (int t = 0; t < k; ++t) {
        const auto j = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - t)));
        std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(j)]);
        out = out.with(idx[static_cast<std::size_t>(t)]);
    }
    return out;
}

}  // namespace

DeletionModel DeletionModel::independent(std::vector<double> p) {
    if (p.empty()) throw std::invalid_argument("independent model: empty probability vector");
    for (double x : p) check_probability(x, "independent model");
    DeletionModel m;
    m.n_ = static_cast<int>(p.size());
    m.variant_ = Independent{std::move(p)};
    return m;
}

DeletionModel DeletionModel::categorical(int n, std::vector<std::pair<Coalition, double>> table) {
    if (n < 1 || n > 64) throw std::invalid_argument("categorical model: n out of range");
    if (table.empty()) throw std::invalid_argument("categorical model: empty table");
    const Coalition full = Coalition::full_set(n);
    std::sort(table.begin(), table.end(),
              [](const auto& a, const auto& b) { return a.first.bits < b.first.bits; });
    std::vector<double> probs;
    probs.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!table[i].first.subset_of(full)) {
            throw std::invalid_argument("categorical model: subset outside support");
        }
        if (i > 0 && table[i].first == table[i - 1].first) {
            throw std::invalid_argument("categorical model: duplicate subset " +
                                        table[i].first.to_string());
        }
        probs.push_back(table[i].second);
    }
    normalize(probs, "categorical model");
    for (std::size_t i = 0; i < table.size(); ++i) table[i].second = probs[i];
    Categorical c;
    c.cumulative = running_cumulative(probs);
    c.table = std::move(table);
    DeletionModel m;
    m.n_ = n;
    m.variant_ = std::move(c);
    return m;
}

DeletionModel DeletionModel::size_weighted(std::vector<double> q) {
    if (q.size() < 2) throw std::invalid_argument("size-weighted model: need n+1 size weights");
    normalize(q, "size-weighted model");
    SizeWeighted sw;
    sw.cumulative = running_cumulative(q);
    sw.q = std::move(q);
    DeletionModel m;
    m.n_ = static_cast<int>(sw.q.size()) - 1;
    m.variant_ = std::move(sw);
    return m;
}

DeletionModel DeletionModel::beta_bernoulli(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || a.size() != b.size()) {
        throw std::invalid_argument("beta-bernoulli model: need matching alpha/beta vectors");
    }
    BetaBernoulli bb;
    bb.mean.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !(b[i] > 0.0)) {
            throw std::invalid_argument("beta-bernoulli model: parameters must be positive");
        }
        bb.mean[i] = a[i] / (a[i] + b[i]);
    }
    bb.a = std::move(a);
    bb.b = std::move(b);
    DeletionModel m;
    m.n_ = static_cast<int>(bb.mean.size());
    m.variant_ = std::move(bb);
    return m;
}

double DeletionModel::pmf(Coalition d) const {
    if (!d.subset_of(Coalition::full_set(n_))) {
        throw std::invalid_argument("pmf: subset outside support " + d.to_string());
    }
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Independent>) {
                return independent_pmf(v.p, d);
            } else if constexpr (std::is_same_v<T, Categorical>) {
                auto it = std::lower_bound(
                    v.table.begin(), v.table.end(), d.bits,
                    [](const auto& entry, std::uint64_t bits) { return entry.first.bits < bits; });
                if (it != v.table.end() && it->first == d) return it->second;
                return 0.0;  // closed-world pmf
            } else if constexpr (std::is_same_v<T, SizeWeighted>) {
                const int k = d.size();
                return v.q[static_cast<std::size_t>(k)] / binomial(n_, k);
            } else {
                return independent_pmf(v.mean, d);
            }
        },
        variant_);
}

double DeletionModel::marginal_staying_probability(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("marginal_staying_probability: bad source");
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Independent>) {
                return v.p[static_cast<std::size_t>(i)];
            } else if constexpr (std::is_same_v<T, Categorical>) {
                KahanSum acc;
                for (const auto& [subset, prob] : v.table) {
                    if (subset.contains(i)) acc.add(prob);
                }
                return acc.value();
            } else if constexpr (std::is_same_v<T, SizeWeighted>) {
                // a size-k draw contains i with probability k/n
                KahanSum acc;
                for (std::size_t k = 1; k < v.q.size(); ++k) {
                    acc.add(v.q[k] * static_cast<double>(k) / static_cast<double>(n_));
                }
                return acc.value();
            } else {
                return v.mean[static_cast<std::size_t>(i)];
            }
        },
        variant_);
}

Coalition DeletionModel::sample(Rng& rng) const {
    return std::visit(
        [&](const auto& v) -> Coalition {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Independent>) {
                Coalition out;
                for (int i = 0; i < n_; ++i) {
                    if (rng.bernoulli(v.p[static_cast<std::size_t>(i)])) out = out.with(i);
                }
                return out;
            } else if constexpr (std::is_same_v<T, Categorical>) {
                const double u = rng.uniform01();
                const auto it = std::upper_bound(v.cumulative.begin(), v.cumulative.end(), u);
                const auto idx = static_cast<std::size_t>(
                    std::min<std::ptrdiff_t>(it - v.cumulative.begin(),
                                             static_cast<std::ptrdiff_t>(v.table.size()) - 1));
                return v.table[idx].first;
            } else if constexpr (std::is_same_v<T, SizeWeighted>) {
                const double u = rng.uniform01();
                const auto it = std::upper_bound(v.cumulative.begin(), v.cumulative.end(), u);
                const auto k = static_cast<int>(
                    std::min<std::ptrdiff_t>(it - v.cumulative.begin(),
                                             static_cast<std::ptrdiff_t>(v.q.size()) - 1));
                return sample_uniform_subset(n_, k, rng);
            } else {
                Coalition out;
                for (int i = 0; i < n_; ++i) {
                    const double p = rng.beta(v.a[static_cast<std::size_t>(i)],
                                              v.b[static_cast<std::size_t>(i)]);
                    if (rng.bernoulli(p)) out = out.with(i);
                }
                return out;
            }
        },
        variant_);
}

bool DeletionModel::support_enumerable() const {
    return std::holds_alternative<Categorical>(variant_) || n_ <= kMaxSupportEnumeration;
}

std::vector<std::pair<Coalition, double>> DeletionModel::enumerate_support() const {
    const bool power_set = !std::holds_alternative<Categorical>(variant_);
    if (power_set && n_ > kMaxSupportEnumeration) {
        throw guard_error("enumerate_support: n = " + std::to_string(n_) +
                          " exceeds the enumeration limit " +
                          std::to_string(kMaxSupportEnumeration));
    }
    std::vector<std::pair<Coalition, double>> out;
    if (const auto* cat = std::get_if<Categorical>(&variant_)) {
        out = cat->table;
        return out;
    }
    const std::uint64_t size = 1ULL << n_;
    for (std::uint64_t mask = 0; mask < size; ++mask) {
        const double p = pmf(Coalition{mask});
        if (p > 0.0) out.emplace_back(Coalition{mask}, p);
    }
    return out;
}

std::string DeletionModel::kind_name() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Independent>) return "independent";
            else if constexpr (std::is_same_v<T, Categorical>) return "categorical";
            else if constexpr (std::is_same_v<T, SizeWeighted>) return "size_weighted";
            else return "beta_bernoulli";
        },
        variant_);
}

}  // namespace delval
