#pragma once

#include <utility>
#include <vector>

#include "delval/deletion_model.hpp"
#include "delval/derdava.hpp"
#include "delval/game.hpp"
#include "delval/semivalue.hpp"

namespace delval {

// Finite distribution with strictly increasing values and positive
// probabilities summing to 1. Near-equal values are merged at an absolute
// tolerance because tail probabilities depend on atom identity.
class DiscreteDistribution {
public:
    static DiscreteDistribution from_atoms(std::vector<std::pair<double, double>> atoms,
                                           double merge_tol = 1e-12);

    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    double prob(std::size_t i) const { return probs_[i]; }
    double min_value() const { return values_.front(); }
    double max_value() const { return values_.back(); }
    double mean() const;

private:
    std::vector<double> values_;
    std::vector<double> probs_;
};

// Distribution of X + Y for independent X, Y.
DiscreteDistribution independent_sum(const DiscreteDistribution& x,
                                     const DiscreteDistribution& y);

enum class RiskSide { Averse, Seeking, Neutral };

std::string risk_side_name(RiskSide side);

struct RiskSpec {
    RiskSide side = RiskSide::Averse;
    double alpha = 1.0;  // in (0, 1]; alpha = 1 reduces to the neutral expectation
};

// Distribution of the coalition's utility under random deletions:
// probability mass of each staying set lands on v(s intersect staying set).
DiscreteDistribution random_utility_distribution(const CooperativeGame& game,
                                                 const DeletionModel& model, Coalition s);

// Expectation over the lower alpha-tail, with the boundary atom split by
// lambda = Pr[V < z] / alpha. The threshold z is the largest support point
// whose strictly-below mass is at most alpha, so alpha = 1 yields the mean.
double c_cvar_minus(const DiscreteDistribution& dist, double alpha);

// Upper-tail counterpart: negate, apply the lower-tail form, negate back.
double c_cvar_plus(const DiscreteDistribution& dist, double alpha);

// Tail average over raw samples: forms the empirical distribution and
// applies the same split formula. Consistent as the sample count grows.
double mc_cvar(const std::vector<double>& samples, double alpha, RiskSide side);

enum class RiskMode { Auto, Exact, Estimate };

// Semivalue (original prior weights, full support) of the game whose
// utility is the chosen C-CVaR of the random coalition utility. Exact mode
// enumerates every coalition's utility distribution; estimator mode samples
// coalitions by prior weight and staying sets for each C-CVaR. The Neutral
// side uses the plain expectation regardless of alpha.
ValuationResult risk_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                             const DeletionModel& model, const RiskSpec& spec,
                             const EstimatorConfig& config, RiskMode mode = RiskMode::Auto);

}  // namespace delval
