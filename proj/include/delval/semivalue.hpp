#pragma once

#include <string>
#include <vector>

#include "delval/game.hpp"

#include "json.hpp"

namespace delval {

// No exact enumeration beyond this; callers are redirected to estimators.
inline constexpr int kMaxExactSources = 20;

// A weighting family over coalition sizes. For a support of size n the
// induced weighting terms (w_0, ..., w_{n-1}) are nonnegative and sum to 1.
struct SemivaluePrior {
    enum class Family { Loo, Shapley, Beta, Banzhaf, Custom };

    Family family = Family::Shapley;
    double alpha = 1.0;  // Beta family
    double beta = 1.0;   // Beta family
    std::vector<double> custom;  // Custom family, one weight per size

    static SemivaluePrior loo() { return {Family::Loo, 1, 1, {}}; }
    static SemivaluePrior shapley() { return {Family::Shapley, 1, 1, {}}; }
    static SemivaluePrior banzhaf() { return {Family::Banzhaf, 1, 1, {}}; }
    static SemivaluePrior beta_family(double a, double b);
    static SemivaluePrior custom_weights(std::vector<double> w);

    std::string name() const;
};

// Per-size weighting terms (w_0, ..., w_{n-1}) for a support of size n.
// Beta weights are the beta-binomial pmf with size parameter swapped so a
// larger alpha pushes weight toward smaller coalitions; computed in log
// space and renormalized with compensated summation.
std::vector<double> weights_for(const SemivaluePrior& prior, int n);

// Weighting-coefficient rows for supports k = 1..n: row(n)[s] is the
// per-coalition coefficient w_s / C(n-1, s), and each smaller row follows
// the Pascal recurrence row(k-1)[s] = row(k)[s] + row(k)[s+1].
class CoefficientTable {
public:
    CoefficientTable(int n, std::vector<std::vector<double>> rows);

    int max_support() const { return n_; }
    // Coefficients for a support of size k (1 <= k <= n); row has k entries.
    const std::vector<double>& row(int k) const;
    // Weighting terms of the induced semivalue at support k: row(k)[s]*C(k-1,s).
    std::vector<double> weighting_terms(int k) const;

    nlohmann::json to_json() const;
    static CoefficientTable from_json(const nlohmann::json& j);

private:
    int n_;
    std::vector<std::vector<double>> rows_;  // rows_[k-1] has k entries
};

// Null-player-out extension: the unique family of smaller-support
// coefficient rows under which padding a game with null players leaves
// every other source's score unchanged.
CoefficientTable npo_extend(const SemivaluePrior& prior, int n);

// Per-source scores by direct evaluation of the weighted marginal-
// contribution sum over all coalitions. Guarded at kMaxExactSources.
std::vector<double> exact_semivalue(const CooperativeGame& game, const SemivaluePrior& prior);

// Same sum, but with the table's coefficients for support size k.
// The game must have exactly k sources and k must not exceed the table.
std::vector<double> semivalue_from_coefficients(const CooperativeGame& game,
                                                const CoefficientTable& table, int k);

}  // namespace delval
