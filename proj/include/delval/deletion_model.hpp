#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "delval/coalition.hpp"
#include "delval/rng.hpp"

namespace delval {

// A probability distribution over staying subsets of [0, n). Immutable
// after construction; sampling takes a caller-owned Rng so the model holds
// no randomness state.
class DeletionModel {
public:
    // Each source stays independently with probability p[i].
    static DeletionModel independent(std::vector<double> p);

    // Explicit pmf over subsets. Validated to sum to 1 within 1e-9, then
    // renormalized exactly. Missing subsets have probability 0.
    static DeletionModel categorical(int n, std::vector<std::pair<Coalition, double>> table);

    // Pr[D' ] = q_{|D'|} / C(n, |D'|); q has n+1 entries, validated like
    // the categorical table.
    static DeletionModel size_weighted(std::vector<double> q);

    // Staying probability of source i itself uncertain: p_i ~ Beta(a_i, b_i),
    // then an independent stay/quit draw. pmf and marginals integrate the
    // Beta out analytically (the compound is Bernoulli at the Beta mean);
    // sampling performs the two-stage draw.
    static DeletionModel beta_bernoulli(std::vector<double> a, std::vector<double> b);

    int num_sources() const { return n_; }

    double pmf(Coalition d_prime) const;
    double marginal_staying_probability(int i) const;
    Coalition sample(Rng& rng) const;

    // All subsets with positive pmf, in ascending mask order. Guarded at
    // n <= 20 for the variants whose support is the full power set.
    std::vector<std::pair<Coalition, double>> enumerate_support() const;

    // Whether enumerate_support is within its guard.
    bool support_enumerable() const;

    std::string kind_name() const;

private:
    struct Independent {
        std::vector<double> p;
    };
    struct Categorical {
        std::vector<std::pair<Coalition, double>> table;  // sorted by mask
        std::vector<double> cumulative;
    };
    struct SizeWeighted {
        std::vector<double> q;           // q[k], k = 0..n
        std::vector<double> cumulative;  // over k
    };
    struct BetaBernoulli {
        std::vector<double> a, b, mean;
    };

    DeletionModel() = default;
    int n_ = 0;
    std::variant<Independent, Categorical, SizeWeighted, BetaBernoulli> variant_;
};

}  // namespace delval
