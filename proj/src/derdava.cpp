#include "delval/derdava.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delval/errors.hpp"
#include "delval/numeric.hpp"
#include "delval/parallel.hpp"

namespace delval {

namespace {

constexpr std::uint64_t kTagExact = 0x64657264;
constexpr std::uint64_t kTagMc = 0x6D63;
constexpr std::uint64_t kTagMcmc = 0x303132;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<double> pmf_table(const DeletionModel& model) {
    const int n = model.num_sources();
    std::vector<double> table(1ULL << n, 0.0);
    for (const auto& [subset, prob] : model.enumerate_support()) table[subset.bits] = prob;
    return table;
}

std::vector<double> value_table(const CooperativeGame& game, int threads) {
    const int n = game.num_sources();
    std::vector<double> values(1ULL << n, 0.0);
    const int block = 256;
    const int blocks = static_cast<int>((values.size() + block - 1) / block);
    parallel_for(threads, blocks, [&](int bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * block;
        const std::size_t hi = std::min(values.size(), lo + block);
        for (std::size_t mask = lo; mask < hi; ++mask) {
            values[mask] = game.evaluate(Coalition{mask});
        }
    });
    return values;
}

double pow3(int k) {
    double x = 1.0;
    for (int i = 0; i < k; ++i) x *= 3.0;
    return x;
}

std::vector<std::vector<double>> cumulative_weighting_terms(const CoefficientTable& table) {
    std::vector<std::vector<double>> cum(static_cast<std::size_t>(table.max_support()) + 1);
    for (int k = 1; k <= table.max_support(); ++k) {
        auto terms = table.weighting_terms(k);
        double acc = 0.0;
        for (auto& t : terms) {
            acc += t;
            t = acc;
        }
        if (!terms.empty()) terms.back() = 1.0;
        cum[static_cast<std::size_t>(k)] = std::move(terms);
    }
    return cum;
}

int draw_categorical(const std::vector<double>& cumulative, Rng& rng) {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

Coalition draw_uniform_coalition(const std::vector<int>& pool, int size, Rng& rng) {
    thread_local std::vector<int> scratch;
    scratch = pool;
    Coalition out;
    for (int t = 0; t < size; ++t) {
        const auto j =
            t + static_cast<int>(rng.below(static_cast<std::uint64_t>(scratch.size()) - t));
        std::swap(scratch[static_cast<std::size_t>(t)], scratch[static_cast<std::size_t>(j)]);
        out = out.with(scratch[static_cast<std::size_t>(t)]);
    }
    return out;
}

struct Budget {
    std::int64_t min_total;  // floor before the convergence rule may stop
    std::int64_t max_total;  // hard cap
    std::int64_t mc_total;   // plain Monte-Carlo run length
};

Budget resolve_budget(const EstimatorConfig& config, int n, double range_width) {
    const double eps = config.target ? config.target->first : 0.01;
    const double delta = config.target ? config.target->second : 0.05;
    const std::int64_t plan = plan_sample_size(n, range_width, eps, delta);
    Budget b;
    b.min_total = config.min_samples > 0 ? config.min_samples : plan;
    b.max_total = config.max_samples > 0
                      ? config.max_samples
                      : std::min<std::int64_t>(10 * plan, 10'000'000);
    // an explicit cap lowers the default floor; an explicit floor wins
    if (config.min_samples == 0) b.min_total = std::min(b.min_total, b.max_total);
    b.max_total = std::max(b.max_total, b.min_total);
    b.mc_total = config.target ? plan
                               : (config.max_samples > 0 ? config.max_samples : plan);
    return b;
}

double gelman_rubin_from_stats(const std::vector<RunningStats>& chains) {
    const auto m = chains.size();
    std::int64_t len = std::numeric_limits<std::int64_t>::max();
    for (const auto& c : chains) len = std::min(len, c.count);
    const double length = static_cast<double>(len);
    double mean_of_means = 0.0;
    for (const auto& c : chains) mean_of_means += c.mean;
    mean_of_means /= static_cast<double>(m);
    double within = 0.0, between = 0.0;
    for (const auto& c : chains) {
        within += c.variance();
        between += (c.mean - mean_of_means) * (c.mean - mean_of_means);
    }
    within /= static_cast<double>(m);
    between = length * between / static_cast<double>(m - 1);
    if (within == 0.0) {
        return between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    const double pooled = (length - 1.0) / length * within + between / length;
    return std::sqrt(pooled / within);
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::Exact: return "exact";
        case Method::MonteCarlo: return "mc";
        case Method::Mcmc012: return "mcmc012";
        case Method::ScaledSemivalue: return "scaled";
        case Method::Risk: return "risk";
    }
    return "?";
}

std::int64_t plan_sample_size(int n, double range_width, double epsilon, double delta) {
    if (n < 1) throw std::invalid_argument("plan_sample_size: n must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("plan_sample_size: epsilon must be > 0");
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("plan_sample_size: delta must be in (0, 1)");
    }
    if (!(range_width >= 0.0)) throw std::invalid_argument("plan_sample_size: negative range");
    const double t = 2.0 * range_width * range_width * static_cast<double>(n) /
                     (epsilon * epsilon) * std::log(2.0 * static_cast<double>(n) / delta);
    return std::max<std::int64_t>(n, static_cast<std::int64_t>(std::ceil(t)));
}

ValuationResult exact_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                              const DeletionModel& model, int threads) {
    Timer timer;
    const int n = game.num_sources();
    if (model.num_sources() != n) {
        throw std::invalid_argument("exact_derdava: model and game support sizes differ");
    }
    if (n > kMaxExactDeletionSources) {
        throw guard_error("exact_derdava: n = " + std::to_string(n) +
                          " exceeds the exact ternary-enumeration limit " +
                          std::to_string(kMaxExactDeletionSources) +
                          "; use mc_derdava or mcmc012_derdava");
    }
    const auto table = npo_extend(prior, n);
    const auto pmf = pmf_table(model);
    const auto values = value_table(game, threads);

    ValuationResult result;
    result.method = Method::Exact;
    result.scores.assign(static_cast<std::size_t>(n), 0.0);
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);

    // Flattened coefficient lookup: coeff[d * (n+1) + s] for |D'| = d, |S| = s.
    std::vector<double> coeff(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
    for (int k = 1; k <= n; ++k) {
        const auto& row = table.row(k);
        for (int s = 0; s < k; ++s) coeff[static_cast<std::size_t>(k * (n + 1) + s)] = row[s];
    }

    parallel_for(threads, n, [&](int i) {
        std::vector<int> others;
        others.reserve(static_cast<std::size_t>(n - 1));
        for (int j = 0; j < n; ++j) {
            if (j != i) others.push_back(j);
        }
        const std::uint64_t self = 1ULL << i;
        // One base-3 counter over the other sources: digit 0 = absent,
        // 1 = stays outside the coalition, 2 = stays inside it.
        std::vector<int> digit(others.size(), 0);
        std::uint64_t s_mask = 0;
        std::uint64_t d_mask = self;
        int s_size = 0;
        int d_size = 1;
        KahanSum acc;
        for (;;) {
            const double p = pmf[d_mask];
            if (p != 0.0) {
                const double w = coeff[static_cast<std::size_t>(d_size * (n + 1) + s_size)];
                const double mac = values[s_mask | self] - values[s_mask];
                acc.add(p * w * mac);
            }
            // increment the counter, updating the masks digit by digit
            std::size_t pos = 0;
            for (; pos < digit.size(); ++pos) {
                const std::uint64_t bit = 1ULL << others[pos];
                if (digit[pos] == 0) {
                    digit[pos] = 1;
                    d_mask |= bit;
                    ++d_size;
                    break;
                }
                if (digit[pos] == 1) {
                    digit[pos] = 2;
                    s_mask |= bit;
                    ++s_size;
                    break;
                }
                digit[pos] = 0;  // carry
                s_mask &= ~bit;
                d_mask &= ~bit;
                --s_size;
                --d_size;
            }
            if (pos == digit.size()) break;
        }
        result.scores[static_cast<std::size_t>(i)] = acc.value();
    });
    result.wall_seconds = timer.seconds();
    return result;
}

std::pair<Coalition, Coalition> sample_012(int n, int i, Rng& rng) {
    if (i < 0 || i >= n) throw std::invalid_argument("sample_012: source out of range");
    Coalition s;
    Coalition d = Coalition{}.with(i);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto state = rng.below(3);
        if (state != 0) d = d.with(j);
        if (state == 2) s = s.with(j);
    }
    return {s, d};
}

ValuationResult mc_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                           const DeletionModel& model, const EstimatorConfig& config) {
    Timer timer;
    const int n = game.num_sources();
    if (model.num_sources() != n) {
        throw std::invalid_argument("mc_derdava: model and game support sizes differ");
    }
    const auto table = npo_extend(prior, n);
    const auto cum_terms = cumulative_weighting_terms(table);
    const Budget budget = resolve_budget(config, n, game.utility_range().width());
    const std::int64_t per_source = (budget.mc_total + n - 1) / n;

    ValuationResult result;
    result.method = Method::MonteCarlo;
    result.scores.assign(static_cast<std::size_t>(n), 0.0);
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<std::int64_t> active(static_cast<std::size_t>(n), 0);

    parallel_for(config.threads, n, [&](int i) {
        Rng rng(derive_seed({config.seed, kTagMc, static_cast<std::uint64_t>(i)}));
        RunningStats stats;
        std::vector<int> pool;
        for (std::int64_t t = 0; t < per_source; ++t) {
            const Coalition stayers = model.sample(rng);
            if (!stayers.contains(i)) {
                stats.add(0.0);
                continue;
            }
            active[static_cast<std::size_t>(i)]++;
            const int k = stayers.size();
            const int s = draw_categorical(cum_terms[static_cast<std::size_t>(k)], rng);
            pool = stayers.without(i).members();
            const Coalition coalition = draw_uniform_coalition(pool, s, rng);
            stats.add(game.marginal_contribution(i, coalition));
        }
        result.scores[static_cast<std::size_t>(i)] = stats.mean;
        result.std_errors[static_cast<std::size_t>(i)] = stats.std_error();
    });
    result.samples_used = per_source * n;
    for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)] == 0) result.starved_sources.push_back(i);
    }
    result.wall_seconds = timer.seconds();
    return result;
}

ValuationResult mcmc012_derdava(const CooperativeGame& game, const SemivaluePrior& prior,
                                const DeletionModel& model, const EstimatorConfig& config) {
    Timer timer;
    const int n = game.num_sources();
    if (model.num_sources() != n) {
        throw std::invalid_argument("mcmc012_derdava: model and game support sizes differ");
    }
    if (config.num_chains < 2) {
        throw std::invalid_argument("mcmc012_derdava: need at least 2 chains for Gelman-Rubin");
    }
    if (!(config.gr_threshold > 1.0)) {
        throw std::invalid_argument("mcmc012_derdava: gr_threshold must exceed 1");
    }
    if (config.batch_size < 1) throw std::invalid_argument("mcmc012_derdava: batch_size >= 1");

    const auto table = npo_extend(prior, n);
    const Budget budget = resolve_budget(config, n, game.utility_range().width());
    const std::int64_t min_per_source = (budget.min_total + n - 1) / n;
    const std::int64_t max_per_source =
        std::max<std::int64_t>((budget.max_total + n - 1) / n,
                               static_cast<std::int64_t>(config.num_chains) * config.batch_size);
    const double inverse_proposal = pow3(n - 1);  // 1 / q(state), q uniform over 3^(n-1)

    // pmf looked up through a dense table when the support is enumerable.
    std::vector<double> pmf;
    if (n <= 20) pmf = pmf_table(model);
    auto pmf_of = [&](Coalition d) { return pmf.empty() ? model.pmf(d) : pmf[d.bits]; };

    ValuationResult result;
    result.method = Method::Mcmc012;
    result.scores.assign(static_cast<std::size_t>(n), 0.0);
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> gr_final(static_cast<std::size_t>(n), 1.0);
    std::vector<char> converged(static_cast<std::size_t>(n), 1);
    std::vector<std::int64_t> used(static_cast<std::size_t>(n), 0);
    std::vector<double> max_coeff(static_cast<std::size_t>(n), 0.0);

    parallel_for(config.threads, n, [&](int i) {
        const int m_chains = config.num_chains;
        std::vector<Rng> rngs;
        rngs.reserve(static_cast<std::size_t>(m_chains));
        for (int m = 0; m < m_chains; ++m) {
            rngs.emplace_back(derive_seed(
                {config.seed, kTagMcmc, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(m)}));
        }
        std::vector<RunningStats> chains(static_cast<std::size_t>(m_chains));
        double statistic = std::numeric_limits<double>::infinity();
        double coeff_peak = 0.0;
        for (;;) {
            for (int m = 0; m < m_chains; ++m) {
                auto& chain = chains[static_cast<std::size_t>(m)];
                auto& rng = rngs[static_cast<std::size_t>(m)];
                for (int t = 0; t < config.batch_size; ++t) {
                    const auto [coalition, stayers] = sample_012(n, i, rng);
                    const double weight = pmf_of(stayers) * inverse_proposal *
                                          table.row(stayers.size())[coalition.size()];
                    coeff_peak = std::max(coeff_peak, std::abs(weight));
                    chain.add(weight == 0.0
                                  ? 0.0
                                  : weight * game.marginal_contribution(i, coalition));
                }
            }
            const std::int64_t total =
                static_cast<std::int64_t>(m_chains) * chains[0].count;
            statistic = gelman_rubin_from_stats(chains);
            if (total >= min_per_source &&
                (statistic <= config.gr_threshold || total >= max_per_source)) {
                break;
            }
        }
        RunningStats combined;
        for (const auto& c : chains) combined.merge(c);
        result.scores[static_cast<std::size_t>(i)] = combined.mean;
        result.std_errors[static_cast<std::size_t>(i)] = combined.std_error();
        gr_final[static_cast<std::size_t>(i)] = statistic;
        converged[static_cast<std::size_t>(i)] = statistic <= config.gr_threshold ? 1 : 0;
        used[static_cast<std::size_t>(i)] = combined.count;
        max_coeff[static_cast<std::size_t>(i)] = coeff_peak;
    });

    result.gelman_rubin_statistic = *std::max_element(gr_final.begin(), gr_final.end());
    result.converged = std::all_of(converged.begin(), converged.end(), [](char c) { return c; });
    for (std::int64_t u : used) result.samples_used += u;
    result.max_importance_coefficient = *std::max_element(max_coeff.begin(), max_coeff.end());
    result.wall_seconds = timer.seconds();
    return result;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least 2 chains");
    std::size_t len = std::numeric_limits<std::size_t>::max();
    for (const auto& c : chains) len = std::min(len, c.size());
    if (len < 2) throw std::invalid_argument("gelman_rubin: each chain needs length >= 2");
    std::vector<RunningStats> stats(chains.size());
    for (std::size_t m = 0; m < chains.size(); ++m) {
        for (std::size_t t = 0; t < len; ++t) stats[m].add(chains[m][t]);
    }
    return gelman_rubin_from_stats(stats);
}

ValuationResult scaled_semivalue(const CooperativeGame& game, const SemivaluePrior& prior,
                                 const DeletionModel& model) {
    Timer timer;
    const int n = game.num_sources();
    if (model.num_sources() != n) {
        throw std::invalid_argument("scaled_semivalue: model and game support sizes differ");
    }
    ValuationResult result;
    result.method = Method::ScaledSemivalue;
    result.scores = exact_semivalue(game, prior);
    for (int i = 0; i < n; ++i) {
        result.scores[static_cast<std::size_t>(i)] *= model.marginal_staying_probability(i);
    }
    result.std_errors.assign(static_cast<std::size_t>(n), 0.0);
    result.wall_seconds = timer.seconds();
    return result;
}

}  // namespace delval
