#include "delval/game.hpp"

#include <list>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

#include "delval/rng.hpp"

namespace delval {

namespace {
constexpr int kUnboundedCacheMaxSources = 20;
constexpr std::size_t kLruCapacity = 1ULL << 20;
}  // namespace

struct CooperativeGame::State {
    int n;
    UtilityFn utility;
    UtilityRange range;
    bool bounded_cache;

    mutable std::shared_mutex mutex;
    mutable std::unordered_map<std::uint64_t, double> cache;
    // LRU bookkeeping, used only when bounded_cache is set (n > 20, where
    // exact enumeration is off the table and estimators churn coalitions).
    mutable std::list<std::uint64_t> lru;
    mutable std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> lru_pos;
};

CooperativeGame::CooperativeGame(int n, UtilityFn utility, UtilityRange range)
    : state_(std::make_shared<State>()) {
    if (n < 1 || n > 64) throw std::invalid_argument("CooperativeGame: n must be in [1, 64]");
    if (!utility) throw std::invalid_argument("CooperativeGame: null utility");
    state_->n = n;
    state_->utility = std::move(utility);
    state_->range = range;
    state_->bounded_cache = n > kUnboundedCacheMaxSources;
}

int CooperativeGame::num_sources() const { return state_->n; }

UtilityRange CooperativeGame::utility_range() const { return state_->range; }

std::size_t CooperativeGame::cache_size() const {
    std::shared_lock lock(state_->mutex);
    return state_->cache.size();
}

double CooperativeGame::evaluate(Coalition s) const {
    State& st = *state_;
    if (!s.subset_of(Coalition::full_set(st.n))) {
        throw std::invalid_argument("evaluate: coalition contains out-of-range source " +
                                    s.to_string());
    }
    if (!st.bounded_cache) {
        {
            std::shared_lock lock(st.mutex);
            auto it = st.cache.find(s.bits);
            if (it != st.cache.end()) return it->second;
        }
        const double v = st.utility(s);
        std::unique_lock lock(st.mutex);
        return st.cache.emplace(s.bits, v).first->second;
    }
    // LRU path
    {
        std::unique_lock lock(st.mutex);
        auto it = st.cache.find(s.bits);
        if (it != st.cache.end()) {
            st.lru.splice(st.lru.begin(), st.lru, st.lru_pos[s.bits]);
            return it->second;
        }
    }
    const double v = st.utility(s);
    std::unique_lock lock(st.mutex);
    auto [it, inserted] = st.cache.emplace(s.bits, v);
    if (inserted) {
        st.lru.push_front(s.bits);
        st.lru_pos[s.bits] = st.lru.begin();
        if (st.cache.size() > kLruCapacity) {
            const std::uint64_t victim = st.lru.back();
            st.lru.pop_back();
            st.lru_pos.erase(victim);
            st.cache.erase(victim);
        }
    }
    return it->second;
}

double CooperativeGame::marginal_contribution(int i, Coalition s) const {
    if (s.contains(i)) {
        throw std::invalid_argument("marginal_contribution: source " + std::to_string(i) +
                                    " already in " + s.to_string());
    }
    return evaluate(s.with(i)) - evaluate(s);
}

CooperativeGame make_additive_game(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("make_additive_game: empty weights");
    double lo = 0.0, hi = 0.0;
    for (double w : weights) (w < 0 ? lo : hi) += w;
    const int n = static_cast<int>(weights.size());
    auto utility = [weights](Coalition s) {
        double total = 0.0;
        for (int i : s.members()) total += weights[static_cast<std::size_t>(i)];
        return total;
    };
    return CooperativeGame(n, std::move(utility), UtilityRange{lo, hi});
}

CooperativeGame make_random_monotone_game(int n, std::uint64_t seed) {
    if (n < 1 || n > 16) throw std::invalid_argument("make_random_monotone_game: n must be in [1, 16]");
    const std::size_t size = 1ULL << n;
    Rng rng(derive_seed({0x6D6F6E6FULL, seed, static_cast<std::uint64_t>(n)}));
    // Nonnegative Moebius masses; the subset-sum (zeta) transform of a
    // nonnegative mass vector is monotone by construction.
    std::vector<double> v(size, 0.0);
    for (std::size_t m = 1; m < size; ++m) v[m] = rng.uniform01();
    for (int i = 0; i < n; ++i) {
        const std::uint64_t bit = 1ULL << i;
        for (std::size_t m = 0; m < size; ++m) {
            if (m & bit) v[m] += v[m & ~bit];
        }
    }
    const double total = v[size - 1];
    if (total > 0) {
        for (auto& x : v) x /= total;
    }
    return make_table_game(n, std::move(v));
}

CooperativeGame make_random_game(int n, std::uint64_t seed) {
    if (n < 1 || n > 16) throw std::invalid_argument("make_random_game: n must be in [1, 16]");
    Rng rng(derive_seed({0x67616D65ULL, seed, static_cast<std::uint64_t>(n)}));
    std::vector<double> v(1ULL << n);
    for (auto& x : v) x = 2.0 * rng.uniform01() - 1.0;
    return make_table_game(n, std::move(v));
}

CooperativeGame make_table_game(int n, std::vector<double> values) {
    if (values.size() != (1ULL << n)) {
        throw std::invalid_argument("make_table_game: need exactly 2^n values");
    }
    double lo = values[0], hi = values[0];
    for (double x : values) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    auto utility = [values = std::move(values)](Coalition s) {
        return values[s.bits];
    };
    return CooperativeGame(n, std::move(utility), UtilityRange{lo, hi});
}

CooperativeGame restrict_game(const CooperativeGame& game, Coalition stayers) {
    if (!stayers.subset_of(game.support())) {
        throw std::invalid_argument("restrict_game: stayers not within support");
    }
    const auto members = stayers.members();
    const int k = static_cast<int>(members.size());
    if (k == 0) throw std::invalid_argument("restrict_game: empty stayers set");
    auto utility = [game, members](Coalition sub) {
        Coalition expanded;
        for (int j : sub.members()) expanded = expanded.with(members[static_cast<std::size_t>(j)]);
        return game.evaluate(expanded);
    };
    return CooperativeGame(k, std::move(utility), game.utility_range());
}

CooperativeGame add_games(const CooperativeGame& v, const CooperativeGame& w) {
    if (v.num_sources() != w.num_sources()) {
        throw std::invalid_argument("add_games: support sizes differ");
    }
    auto utility = [v, w](Coalition s) { return v.evaluate(s) + w.evaluate(s); };
    UtilityRange range{v.utility_range().lo + w.utility_range().lo,
                       v.utility_range().hi + w.utility_range().hi};
    return CooperativeGame(v.num_sources(), std::move(utility), range);
}

}  // namespace delval
