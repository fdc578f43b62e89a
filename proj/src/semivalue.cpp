#include "delval/semivalue.hpp"

#include <cmath>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/numeric.hpp"

namespace delval {

SemivaluePrior SemivaluePrior::beta_family(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("beta prior requires alpha > 0 and beta > 0");
    }
    SemivaluePrior p;
    p.family = Family::Beta;
    p.alpha = a;
    p.beta = b;
    return p;
}

SemivaluePrior SemivaluePrior::custom_weights(std::vector<double> w) {
    SemivaluePrior p;
    p.family = Family::Custom;
    p.custom = std::move(w);
    return p;
}

std::string SemivaluePrior::name() const {
    switch (family) {
        case Family::Loo: return "loo";
        case Family::Shapley: return "shapley";
        case Family::Banzhaf: return "banzhaf";
        case Family::Beta:
            return "beta(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
        case Family::Custom: return "custom";
    }
    return "?";
}

std::vector<double> weights_for(const SemivaluePrior& prior, int n) {
    if (n < 1) throw std::invalid_argument("weights_for: n must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    switch (prior.family) {
        case SemivaluePrior::Family::Shapley:
            for (auto& x : w) x = 1.0 / n;
            return w;
        case SemivaluePrior::Family::Loo:
            w.back() = 1.0;
            return w;
        case SemivaluePrior::Family::Banzhaf: {
            const double denom = std::ldexp(1.0, n - 1);  // 2^{n-1}
            for (int s = 0; s < n; ++s) w[s] = binomial(n - 1, s) / denom;
            return w;
        }
        case SemivaluePrior::Family::Beta: {
            const double lb0 = log_beta(prior.beta, prior.alpha);
            for (int s = 0; s < n; ++s) {
                w[s] = std::exp(log_binomial(n - 1, s) +
                                log_beta(s + prior.beta, n - 1 - s + prior.alpha) - lb0);
            }
            KahanSum total;
            for (double x : w) total.add(x);
            for (auto& x : w) x /= total.value();
            return w;
        }
        case SemivaluePrior::Family::Custom: {
            if (static_cast<int>(prior.custom.size()) != n) {
                throw std::invalid_argument("custom prior: need exactly n weights, got " +
                                            std::to_string(prior.custom.size()));
            }
            KahanSum total;
            for (double x : prior.custom) {
                if (x < 0.0) throw std::invalid_argument("custom prior: negative weight");
                total.add(x);
            }
            if (std::abs(total.value() - 1.0) > 1e-9) {
                throw std::invalid_argument("custom prior: weights must sum to 1 (within 1e-9)");
            }
            for (int s = 0; s < n; ++s) w[s] = prior.custom[s] / total.value();
            return w;
        }
    }
    throw std::logic_error("weights_for: unknown family");
}

CoefficientTable::CoefficientTable(int n, std::vector<std::vector<double>> rows)
    : n_(n), rows_(std::move(rows)) {
    if (n_ < 1 || rows_.size() != static_cast<std::size_t>(n_)) {
        throw std::invalid_argument("CoefficientTable: need one row per support size 1..n");
    }
    for (int k = 1; k <= n_; ++k) {
        if (rows_[static_cast<std::size_t>(k - 1)].size() != static_cast<std::size_t>(k)) {
            throw std::invalid_argument("CoefficientTable: row " + std::to_string(k) +
                                        " must have " + std::to_string(k) + " entries");
        }
    }
}

const std::vector<double>& CoefficientTable::row(int k) const {
    if (k < 1 || k > n_) {
        throw std::out_of_range("CoefficientTable: support size " + std::to_string(k) +
                                " outside extension range [1, " + std::to_string(n_) + "]");
    }
    return rows_[static_cast<std::size_t>(k - 1)];
}

std::vector<double> CoefficientTable::weighting_terms(int k) const {
    const auto& r = row(k);
    std::vector<double> terms(r.size());
    for (int s = 0; s < k; ++s) terms[s] = r[s] * binomial(k - 1, s);
    return terms;
}

nlohmann::json CoefficientTable::to_json() const {
    return nlohmann::json{{"n", n_}, {"rows", rows_}};
}

CoefficientTable CoefficientTable::from_json(const nlohmann::json& j) {
    return CoefficientTable(j.at("n").get<int>(),
                            j.at("rows").get<std::vector<std::vector<double>>>());
}

CoefficientTable npo_extend(const SemivaluePrior& prior, int n) {
    const auto w = weights_for(prior, n);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    auto& top = rows[static_cast<std::size_t>(n - 1)];
    top.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) top[s] = w[s] / binomial(n - 1, s);
    for (int k = n; k >= 2; --k) {
        const auto& cur = rows[static_cast<std::size_t>(k - 1)];
        auto& below = rows[static_cast<std::size_t>(k - 2)];
        below.resize(static_cast<std::size_t>(k - 1));
        for (int s = 0; s + 1 < k; ++s) below[s] = cur[s] + cur[s + 1];
    }
    return CoefficientTable(n, std::move(rows));
}

namespace {

std::vector<double> weighted_mac_sum(const CooperativeGame& game,
                                     const std::vector<double>& coeffs) {
    const int n = game.num_sources();
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    const std::uint64_t full = Coalition::full_set(n).bits;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t others = full & ~(1ULL << i);
        KahanSum acc;
        for_each_subset(others, [&](Coalition s) {
            acc.add(coeffs[static_cast<std::size_t>(s.size())] *
                    game.marginal_contribution(i, s));
        });
        scores[static_cast<std::size_t>(i)] = acc.value();
    }
    return scores;
}

}  // namespace

std::vector<double> exact_semivalue(const CooperativeGame& game, const SemivaluePrior& prior) {
    const int n = game.num_sources();
    if (n > kMaxExactSources) {
        throw guard_error("exact_semivalue: n = " + std::to_string(n) + " exceeds the exact limit " +
                          std::to_string(kMaxExactSources) + "; use a sampling estimator");
    }
    const auto w = weights_for(prior, n);
    std::vector<double> coeffs(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) coeffs[s] = w[s] / binomial(n - 1, s);
    return weighted_mac_sum(game, coeffs);
}

std::vector<double> semivalue_from_coefficients(const CooperativeGame& game,
                                                const CoefficientTable& table, int k) {
    if (k > table.max_support()) {
        throw std::out_of_range("semivalue_from_coefficients: k = " + std::to_string(k) +
                                " beyond table extension range (n = " +
                                std::to_string(table.max_support()) + ")");
    }
    if (game.num_sources() != k) {
        throw std::invalid_argument("semivalue_from_coefficients: game has " +
                                    std::to_string(game.num_sources()) + " sources, expected " +
                                    std::to_string(k));
    }
    if (k > kMaxExactSources) {
        throw guard_error("semivalue_from_coefficients: k exceeds the exact limit");
    }
    return weighted_mac_sum(game, table.row(k));
}

}  // namespace delval
