#include "delval/validation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "delval/derdava.hpp"
#include "delval/numeric.hpp"
#include "delval/rng.hpp"

namespace delval {

namespace {

constexpr double kTolerance = 1e-9;

SemivaluePrior prior_for_trial(int trial) {
    switch (trial % 4) {
        case 0: return SemivaluePrior::shapley();
        case 1: return SemivaluePrior::banzhaf();
        case 2: return SemivaluePrior::loo();
        default: return SemivaluePrior::beta_family(4.0, 2.0);
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::string describe(const char* what, int trial, std::uint64_t seed, int n,
                     const DeletionModel& model, const SemivaluePrior& prior, double error) {
    std::ostringstream os;
    os << what << ": trial=" << trial << " seed=" << seed << " n=" << n
       << " model=" << model.kind_name() << " prior=" << prior.name() << " error=" << error;
    return os.str();
}

}  // namespace

nlohmann::json AxiomReport::to_json() const {
    return nlohmann::json{{"axiom", axiom},
                          {"passed", passed},
                          {"tolerance", tolerance},
                          {"trials", trials},
                          {"witness", witness}};
}

std::string axiom_name(Axiom a) {
    switch (a) {
        case Axiom::RobustLinearity: return "robust_linearity";
        case Axiom::RobustDummyPlayer: return "robust_dummy_player";
        case Axiom::RobustInterchangeability: return "robust_interchangeability";
        case Axiom::RobustMonotonicity: return "robust_monotonicity";
    }
    return "?";
}

CooperativeGame static_dual_game(const CooperativeGame& game, const DeletionModel& model) {
    if (model.num_sources() != game.num_sources()) {
        throw std::invalid_argument("static_dual_game: support sizes differ");
    }
    auto support = std::make_shared<std::vector<std::pair<Coalition, double>>>(
        model.enumerate_support());
    auto utility = [game, support](Coalition s) {
        KahanSum acc;
        for (const auto& [stayers, prob] : *support) {
            acc.add(prob * game.evaluate(s.intersect(stayers)));
        }
        return acc.value();
    };
    // convex combination of utilities stays within the original range
    return CooperativeGame(game.num_sources(), std::move(utility), game.utility_range());
}

CooperativeGame post_deletion_utility(const CooperativeGame& game, Coalition stayers) {
    if (!stayers.subset_of(game.support())) {
        throw std::invalid_argument("post_deletion_utility: stayers outside support");
    }
    auto utility = [game, stayers](Coalition s) { return game.evaluate(s.intersect(stayers)); };
    return CooperativeGame(game.num_sources(), std::move(utility), game.utility_range());
}

DeletionModel make_random_deletion_model(int n, std::uint64_t seed) {
    Rng rng(derive_seed({0x6D6F64656CULL, seed}));
    switch (rng.below(3)) {
        case 0: {
            std::vector<double> p(static_cast<std::size_t>(n));
            for (auto& x : p) x = rng.uniform01();
            return DeletionModel::independent(std::move(p));
        }
        case 1: {
            // random categorical over a handful of subsets, always
            // including the full set so no source is globally absent
            const int entries = 2 + static_cast<int>(rng.below(5));
            std::vector<std::pair<Coalition, double>> table;
            table.emplace_back(Coalition::full_set(n), 0.2 + rng.uniform01());
            for (int e = 1; e < entries; ++e) {
                const Coalition subset{rng.below(1ULL << n)};
                bool dup = false;
                for (const auto& [existing, _] : table) dup = dup || existing == subset;
                if (!dup) table.emplace_back(subset, 0.05 + rng.uniform01());
            }
            double total = 0.0;
            for (const auto& [_, w] : table) total += w;
            for (auto& [_, w] : table) w /= total;
            return DeletionModel::categorical(n, std::move(table));
        }
        default: {
            std::vector<double> q(static_cast<std::size_t>(n) + 1);
            double total = 0.0;
            for (auto& x : q) {
                x = rng.uniform01();
                total += x;
            }
            for (auto& x : q) x /= total;
            return DeletionModel::size_weighted(std::move(q));
        }
    }
}

namespace {

AxiomReport check_linearity(int trials, std::uint64_t seed) {
    AxiomReport report{axiom_name(Axiom::RobustLinearity), true, kTolerance, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x6C696EULL, static_cast<std::uint64_t>(t)});
        const int n = 2 + static_cast<int>(s % 5);  // up to 6 sources
        const auto v = make_random_game(n, s);
        const auto w = make_random_game(n, splitmix64(s));
        const auto model = make_random_deletion_model(n, s);
        const auto prior = prior_for_trial(t);
        const auto sum_scores = exact_derdava(add_games(v, w), prior, model).scores;
        const auto v_scores = exact_derdava(v, prior, model).scores;
        const auto w_scores = exact_derdava(w, prior, model).scores;
        std::vector<double> combined(v_scores.size());
        for (std::size_t i = 0; i < combined.size(); ++i) {
            combined[i] = v_scores[i] + w_scores[i];
        }
        const double err = max_abs_diff(sum_scores, combined);
        if (err > kTolerance) {
            report.passed = false;
            report.witness = describe("tau(v+w) != tau(v)+tau(w)", t, s, n, model, prior, err);
        }
    }
    return report;
}

AxiomReport check_dummy_player(int trials, std::uint64_t seed) {
    AxiomReport report{axiom_name(Axiom::RobustDummyPlayer), true, kTolerance, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x64756DULL, static_cast<std::uint64_t>(t)});
        const int n = 2 + static_cast<int>(s % 5);
        Rng rng(s);
        const int dummy = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const double own = 2.0 * rng.uniform01() - 1.0;
        // separable utility: base on the others (zero at the empty set)
        // plus the dummy's own worth whenever it is present
        std::vector<double> base(1ULL << (n - 1));
        base[0] = 0.0;
        for (std::size_t m = 1; m < base.size(); ++m) base[m] = 2.0 * rng.uniform01() - 1.0;
        auto compress = [dummy](Coalition s_full) {
            std::uint64_t bits = 0;
            int pos = 0;
            for (int j = 0; j < 64; ++j) {
                if (j == dummy) continue;
                if (s_full.contains(j)) bits |= 1ULL << pos;
                ++pos;
                if (pos >= 63) break;
            }
            return bits;
        };
        std::vector<double> table(1ULL << n);
        for (std::uint64_t m = 0; m < table.size(); ++m) {
            const Coalition c{m};
            table[m] = base[compress(c)] + (c.contains(dummy) ? own : 0.0);
        }
        const auto game = make_table_game(n, std::move(table));
        const auto model = make_random_deletion_model(n, s);
        const auto prior = prior_for_trial(t);
        const auto scores = exact_derdava(game, prior, model).scores;
        KahanSum expected;  // own utility weighted by the staying cases
        for (const auto& [stayers, prob] : model.enumerate_support()) {
            if (stayers.contains(dummy)) expected.add(prob * own);
        }
        const double err = std::abs(scores[static_cast<std::size_t>(dummy)] - expected.value());
        if (err > kTolerance) {
            report.passed = false;
            report.witness =
                describe("dummy player reward mismatch", t, s, n, model, prior, err);
        }
    }
    return report;
}

AxiomReport check_interchangeability(int trials, std::uint64_t seed) {
    AxiomReport report{axiom_name(Axiom::RobustInterchangeability), true, kTolerance, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x696E74ULL, static_cast<std::uint64_t>(t)});
        const int n = 3 + static_cast<int>(s % 4);  // up to 6 sources
        Rng rng(s);
        const int a = 0, b = 1;  // the planted pair
        // utility depends only on |S ∩ {a, b}| and the rest of S, which
        // makes a and b interchangeable by construction
        std::vector<double> f(3ULL << (n - 2));
        for (auto& x : f) x = 2.0 * rng.uniform01() - 1.0;
        std::vector<double> table(1ULL << n);
        for (std::uint64_t m = 0; m < table.size(); ++m) {
            const Coalition c{m};
            const int pair = (c.contains(a) ? 1 : 0) + (c.contains(b) ? 1 : 0);
            const std::uint64_t rest = m >> 2;
            table[m] = f[static_cast<std::size_t>(pair) + 3 * rest];
        }
        const auto game = make_table_game(n, std::move(table));
        // equal staying probability for the pair keeps their roles
        // exchangeable in the deletion distribution
        std::vector<double> p(static_cast<std::size_t>(n));
        for (auto& x : p) x = rng.uniform01();
        p[static_cast<std::size_t>(b)] = p[static_cast<std::size_t>(a)];
        const auto model = DeletionModel::independent(std::move(p));
        const auto prior = prior_for_trial(t);
        const auto scores = exact_derdava(game, prior, model).scores;
        const double err = std::abs(scores[static_cast<std::size_t>(a)] -
                                    scores[static_cast<std::size_t>(b)]);
        if (err > kTolerance) {
            report.passed = false;
            report.witness =
                describe("interchangeable pair scored unequally", t, s, n, model, prior, err);
        }
    }
    return report;
}

AxiomReport check_monotonicity(int trials, std::uint64_t seed) {
    AxiomReport report{axiom_name(Axiom::RobustMonotonicity), true, 1e-12, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x6D6F6EULL, static_cast<std::uint64_t>(t)});
        const int n = 2 + static_cast<int>(s % 6);  // up to 7 sources
        const auto game = make_random_monotone_game(n, s);
        const auto model = make_random_deletion_model(n, s);
        const auto prior = prior_for_trial(t);
        const auto scores = exact_derdava(game, prior, model).scores;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] < -1e-12) {
                report.passed = false;
                report.witness = describe("negative score in a monotone game", t, s, n, model,
                                          prior, scores[i]);
                break;
            }
        }
    }
    return report;
}

}  // namespace

AxiomReport check_axiom(Axiom axiom, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_axiom: trials must be >= 1");
    switch (axiom) {
        case Axiom::RobustLinearity: return check_linearity(trials, seed);
        case Axiom::RobustDummyPlayer: return check_dummy_player(trials, seed);
        case Axiom::RobustInterchangeability: return check_interchangeability(trials, seed);
        case Axiom::RobustMonotonicity: return check_monotonicity(trials, seed);
    }
    throw std::logic_error("check_axiom: unknown axiom");
}

AxiomReport check_npo_consistency(const SemivaluePrior& prior, int n, int num_null,
                                  std::uint64_t seed) {
    if (n < 1 || n > 10 || num_null < 0 || num_null >= n) {
        throw std::invalid_argument("check_npo_consistency: need 0 <= num_null < n <= 10");
    }
    AxiomReport report{"npo_consistency(" + prior.name() + ")", true, kTolerance, 1, ""};
    const int k = n - num_null;
    const auto real_game = make_random_game(k, seed);
    // null players occupy the top indices: they never change the utility
    const auto padded = [&] {
        auto utility = [real_game, k](Coalition s) {
            return real_game.evaluate(Coalition{s.bits & ((1ULL << k) - 1ULL)});
        };
        return CooperativeGame(n, std::move(utility), real_game.utility_range());
    }();
    const auto table = npo_extend(prior, n);
    const auto padded_scores = semivalue_from_coefficients(padded, table, n);
    const auto real_scores = semivalue_from_coefficients(real_game, table, k);
    double err = 0.0;
    for (int i = 0; i < k; ++i) {
        err = std::max(err, std::abs(padded_scores[static_cast<std::size_t>(i)] -
                                     real_scores[static_cast<std::size_t>(i)]));
    }
    for (int i = k; i < n; ++i) {
        err = std::max(err, std::abs(padded_scores[static_cast<std::size_t>(i)]));
    }
    if (err > kTolerance) {
        report.passed = false;
        std::ostringstream os;
        os << "null padding shifted scores: prior=" << prior.name() << " n=" << n
           << " num_null=" << num_null << " seed=" << seed << " error=" << err;
        report.witness = os.str();
    }
    return report;
}

AxiomReport check_dual_equivalence(int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_dual_equivalence: trials must be >= 1");
    AxiomReport report{"dual_equivalence", true, kTolerance, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x6475616CULL, static_cast<std::uint64_t>(t)});
        const int n = 2 + static_cast<int>(s % 7);  // up to 8 sources
        const auto game = make_random_game(n, s);
        const auto model = make_random_deletion_model(n, s);
        const auto prior = prior_for_trial(t);
        const auto direct = exact_derdava(game, prior, model).scores;
        const auto via_dual = exact_semivalue(static_dual_game(game, model), prior);
        const double err = max_abs_diff(direct, via_dual);
        if (err > kTolerance) {
            report.passed = false;
            report.witness =
                describe("static-dual route disagrees", t, s, n, model, prior, err);
        }
    }
    return report;
}

AxiomReport check_restriction_consistency(int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("check_restriction_consistency: trials must be >= 1");
    }
    AxiomReport report{"restriction_consistency", true, kTolerance, trials, ""};
    for (int t = 0; t < trials && report.passed; ++t) {
        const std::uint64_t s = derive_seed({seed, 0x72657374ULL, static_cast<std::uint64_t>(t)});
        const int n = 2 + static_cast<int>(s % 7);
        const auto game = make_random_game(n, s);
        Rng rng(splitmix64(s));
        Coalition stayers{1 + rng.below((1ULL << n) - 1)};  // nonempty
        const auto prior = prior_for_trial(t);
        const auto table = npo_extend(prior, n);
        const auto on_full =
            semivalue_from_coefficients(post_deletion_utility(game, stayers), table, n);
        const auto on_restricted =
            semivalue_from_coefficients(restrict_game(game, stayers), table, stayers.size());
        const auto members = stayers.members();
        double err = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            err = std::max(err, std::abs(on_full[static_cast<std::size_t>(members[j])] -
                                         on_restricted[j]));
        }
        // deleted sources are null players of the post-deletion utility
        for (int i = 0; i < n; ++i) {
            if (!stayers.contains(i)) {
                err = std::max(err, std::abs(on_full[static_cast<std::size_t>(i)]));
            }
        }
        if (err > kTolerance) {
            report.passed = false;
            std::ostringstream os;
            os << "post-deletion restriction mismatch: trial=" << t << " seed=" << s
               << " n=" << n << " stayers=" << stayers.to_string() << " error=" << err;
            report.witness = os.str();
        }
    }
    return report;
}

}  // namespace delval
