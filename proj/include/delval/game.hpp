#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "delval/coalition.hpp"

namespace delval {

struct UtilityRange {
    double lo = 0.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
};

// A cooperative game over n indexed sources with a memoized, deterministic
// utility oracle. Copies share the memo table. Thread-safe: a coalition's
// value may be computed more than once under contention, but the utility is
// deterministic so every writer stores the same value.
class CooperativeGame {
public:
    using UtilityFn = std::function<double(Coalition)>;

    CooperativeGame(int n, UtilityFn utility, UtilityRange range);

    int num_sources() const;
    Coalition support() const { return Coalition::full_set(num_sources()); }
    UtilityRange utility_range() const;

    // v(s), memoized. Throws std::invalid_argument if s has members >= n.
    double evaluate(Coalition s) const;

    // v(s + i) - v(s). Precondition: i not in s.
    double marginal_contribution(int i, Coalition s) const;

    std::size_t cache_size() const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

// Modular game: v(S) = sum of member weights. Every source is a dummy player.
CooperativeGame make_additive_game(const std::vector<double>& weights);

// Random monotone game with v(empty)=0, v(full)=1, built from nonnegative
// Moebius masses; 1 <= n <= 16, deterministic in seed.
CooperativeGame make_random_monotone_game(int n, std::uint64_t seed);

// Random game with utilities uniform in [-1, 1]; n <= 16.
CooperativeGame make_random_game(int n, std::uint64_t seed);

// Game backed by an explicit table of 2^n values indexed by coalition mask.
CooperativeGame make_table_game(int n, std::vector<double> values);

// Sub-game on the members of `stayers`, compact-indexed in ascending order
// of original index. Shares the parent's memo through the captured oracle.
CooperativeGame restrict_game(const CooperativeGame& game, Coalition stayers);

// v + w on the same support.
CooperativeGame add_games(const CooperativeGame& v, const CooperativeGame& w);

}  // namespace delval
