#include "delval/risk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/numeric.hpp"
#include "delval/parallel.hpp"

namespace delval {

namespace {
constexpr std::uint64_t kTagRisk = 0x7269736B;
constexpr std::size_t kMaxRiskSupport = 1ULL << 13;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("risk level alpha must be in (0, 1]");
    }
}
}  // namespace

DiscreteDistribution DiscreteDistribution::from_atoms(
    std::vector<std::pair<double, double>> atoms, double merge_tol) {
    if (atoms.empty()) throw std::invalid_argument("DiscreteDistribution: no atoms");
    std::sort(atoms.begin(), atoms.end());
    DiscreteDistribution d;
    KahanSum total;
    for (const auto& [value, prob] : atoms) {
        if (!(prob >= 0.0)) throw std::invalid_argument("DiscreteDistribution: negative mass");
        if (prob == 0.0) continue;
        total.add(prob);
        if (!d.values_.empty() && value - d.values_.back() <= merge_tol) {
            d.probs_.back() += prob;
        } else {
            d.values_.push_back(value);
            d.probs_.push_back(prob);
        }
    }
    if (d.values_.empty()) throw std::invalid_argument("DiscreteDistribution: zero total mass");
    if (std::abs(total.value() - 1.0) > 1e-9) {
        throw std::invalid_argument("DiscreteDistribution: mass sums to " +
                                    std::to_string(total.value()) + ", expected 1 within 1e-9");
    }
    for (auto& p : d.probs_) p /= total.value();
    return d;
}

double DiscreteDistribution::mean() const {
    KahanSum acc;
    for (std::size_t i = 0; i < values_.size(); ++i) acc.add(values_[i] * probs_[i]);
    return acc.value();
}

DiscreteDistribution independent_sum(const DiscreteDistribution& x,
                                     const DiscreteDistribution& y) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(x.size() * y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            atoms.emplace_back(x.value(i) + y.value(j), x.prob(i) * y.prob(j));
        }
    }
    return DiscreteDistribution::from_atoms(std::move(atoms));
}

std::string risk_side_name(RiskSide side) {
    switch (side) {
        case RiskSide::Averse: return "averse";
        case RiskSide::Seeking: return "seeking";
        case RiskSide::Neutral: return "neutral";
    }
    return "?";
}

DiscreteDistribution random_utility_distribution(const CooperativeGame& game,
                                                 const DeletionModel& model, Coalition s) {
    if (model.num_sources() != game.num_sources()) {
        throw std::invalid_argument("random_utility_distribution: support sizes differ");
    }
    std::vector<std::pair<double, double>> atoms;
    for (const auto& [stayers, prob] : model.enumerate_support()) {
        atoms.emplace_back(game.evaluate(s.intersect(stayers)), prob);
    }
    return DiscreteDistribution::from_atoms(std::move(atoms));
}

double c_cvar_minus(const DiscreteDistribution& dist, double alpha) {
    check_alpha(alpha);
    // z = largest support point with Pr[V < z] <= alpha, so z_1 is the max atom.
    std::size_t z_index = 0;
    double below = 0.0;  // Pr[V < z]
    double cum = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        if (cum <= alpha) {
            z_index = j;
            below = cum;
        } else {
            break;
        }
        cum += dist.prob(j);
    }
    const double z = dist.value(z_index);
    const double lambda = below / alpha;
    double tail = 0.0;
    if (below > 0.0) {
        KahanSum acc;
        for (std::size_t j = 0; j < z_index; ++j) acc.add(dist.value(j) * dist.prob(j));
        tail = acc.value() / below;
    }
    return lambda * tail + (1.0 - lambda) * z;
}

double c_cvar_plus(const DiscreteDistribution& dist, double alpha) {
    check_alpha(alpha);
    std::vector<std::pair<double, double>> negated;
    negated.reserve(dist.size());
    for (std::size_t j = 0; j < dist.size(); ++j) {
        negated.emplace_back(-dist.value(j), dist.prob(j));
    }
    return -c_cvar_minus(DiscreteDistribution::from_atoms(std::move(negated)), alpha);
}

double mc_cvar(const std::vector<double>& samples, double alpha, RiskSide side) {
    if (samples.empty()) throw std::invalid_argument("mc_cvar: no samples");
    const double w = 1.0 / static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(samples.size());
    for (double v : samples) atoms.emplace_back(v, w);
    const auto dist = DiscreteDistribution::from_atoms(std::move(atoms));
    switch (side) {
        case RiskSide::Averse: return c_cvar_minus(dist, alpha);
        case RiskSide::Seeking: return c_cvar_plus(dist, alpha);
        case RiskSide::Neutral: return dist.mean();
    }
    return dist.mean();
}

namespace {

double risk_value(const DiscreteDistribution& dist, const RiskSpec& spec) {
    switch (spec.side) {
        case RiskSide::Averse: return c_cvar_minus(dist, spec.alpha);
        case RiskSide::Seeking: return c_cvar_plus(dist, spec.alpha);
        case RiskSide::Neutral: return dist.mean();
    }
    return dist.mean();
}

ValuationResult risk_exact(const CooperativeGame& game, const SemivaluePrior& prior,
                           const DeletionModel& model, const RiskSpec& spec,
                           const EstimatorConfig& config) {
    const int n = game.num_sources();
    const auto support = model.enumerate_support();
    if (support.size() > kMaxRiskSupport) {
        throw guard_error("risk_derdava: staying-set support too large for exact mode");
    }
    // One C-CVaR evaluation per coalition; the prior is applied to the
    // resulting static game on the full support.
    std::vector<double> risk_values(1ULL << n, 0.0);
    const int block = 64;
    const int blocks = static_cast<int>((risk_values.size() + block - 1) / block);
    parallel_for(config.threads, blocks, [&](int bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * block;
        const std::size_t hi = std::min(risk_values.size(), lo + block);
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t mask = lo; mask < hi; ++mask) {
            atoms.clear();
            for (const auto& [stayers, prob] : support) {
                atoms.emplace_back(game.evaluate(Coalition{mask}.intersect(stayers)), prob);
            }
            risk_values[mask] = risk_value(DiscreteDistribution::from_atoms(atoms), spec);
        }
    });
    double lo = risk_values[0], hi = risk_values[0];
    for (double v : risk_values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CooperativeGame risk_game(
        n, [risk_values = std::move(risk_values)](Coalition s) { return risk_values[s.bits]; },
        UtilityRange{lo, hi});
    ValuationResult result;
    result.method = Method::Risk;
    result.scores = exact_semivalue(risk_game, prior);
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);
    return result;
}

ValuationResult risk_estimate(const CooperativeGame& game, const SemivaluePrior& prior,
                              const DeletionModel& model, const RiskSpec& spec,
                              const EstimatorConfig& config) {
    const int n = game.num_sources();
    const auto weights = weights_for(prior, n);
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < weights.size(); ++s) {
        acc += weights[s];
        cum[s] = acc;
    }
    cum.back() = 1.0;

    const double eps = config.target ? config.target->first : 0.01;
    const double delta = config.target ? config.target->second : 0.05;
    std::int64_t total = config.max_samples > 0
                             ? config.max_samples
                             : plan_sample_size(n, game.utility_range().width(), eps, delta);
    // Each draw spends cvar_samples staying sets on the two C-CVaR
    // estimates, so the coalition budget divides the global one.
    const std::int64_t per_source =
        std::max<std::int64_t>(1, total / (static_cast<std::int64_t>(n) *
                                           std::max(1, config.cvar_samples / 8)));

    ValuationResult result;
    result.method = Method::Risk;
    result.scores.assign(static_cast<std::size_t>(n), 0.0);
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<std::int64_t> used(static_cast<std::size_t>(n), 0);

    parallel_for(config.threads, n, [&](int i) {
        Rng rng(derive_seed({config.seed, kTagRisk, static_cast<std::uint64_t>(i)}));
        RunningStats stats;
        std::vector<int> pool;
        pool.reserve(static_cast<std::size_t>(n - 1));
        std::vector<double> with_i, without_i;
        with_i.reserve(static_cast<std::size_t>(config.cvar_samples));
        without_i.reserve(static_cast<std::size_t>(config.cvar_samples));
        for (std::int64_t t = 0; t < per_source; ++t) {
            const double u = rng.uniform01();
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            const int size = static_cast<int>(std::min<std::ptrdiff_t>(
                it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size()) - 1));
            pool.clear();
            for (int j = 0; j < n; ++j) {
                if (j != i) pool.push_back(j);
            }
            Coalition coalition;
            for (int k = 0; k < size; ++k) {
                const auto j =
                    k + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size()) - k));
                std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
                coalition = coalition.with(pool[static_cast<std::size_t>(k)]);
            }
            // common staying-set draws for both tails of the marginal
            with_i.clear();
            without_i.clear();
            const Coalition plus = coalition.with(i);
            for (int d = 0; d < config.cvar_samples; ++d) {
                const Coalition stayers = model.sample(rng);
                with_i.push_back(game.evaluate(plus.intersect(stayers)));
                without_i.push_back(game.evaluate(coalition.intersect(stayers)));
            }
            stats.add(mc_cvar(with_i, spec.alpha, spec.side) -
                      mc_cvar(without_i, spec.alpha, spec.side));
        }
        result.scores[static_cast<std::size_t>(i)] = stats.mean;
        result.std_errors[static_cast<std::size_t>(i)] = stats.std_error();
        used[static_cast<std::size_t>(i)] =
            per_source * static_cast<std::int64_t>(config.cvar_samples);
    });
    for (std::int64_t u : used) result.samples_used += u;
    return result;
}

}  // namespace

ValuationResult risk_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                             const DeletionModel& model, const RiskSpec& spec,
                             const EstimatorConfig& config, RiskMode mode) {
    check_alpha(spec.alpha);
    if (model.num_sources() != game.num_sources()) {
        throw std::invalid_argument("risk_derdava: model and game support sizes differ");
    }
    const auto start = std::chrono::steady_clock::now();
    const int n = game.num_sources();
    const bool exact_feasible = n <= kMaxExactDeletionSources;
    ValuationResult result;
    if (mode == RiskMode::Exact || (mode == RiskMode::Auto && exact_feasible)) {
        if (!exact_feasible) {
            throw guard_error("risk_derdava: n = " + std::to_string(n) +
                              " exceeds the exact limit " +
                              std::to_string(kMaxExactDeletionSources) +
                              "; use the estimator mode");
        }
        result = risk_exact(game, prior, model, spec, config);
    } else {
        result = risk_estimate(game, prior, model, spec, config);
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace delval
