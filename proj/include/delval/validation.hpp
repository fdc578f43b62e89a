#pragma once

#include <cstdint>
#include <string>

#include "delval/deletion_model.hpp"
#include "delval/game.hpp"
#include "delval/semivalue.hpp"

#include "json.hpp"

namespace delval {

struct AxiomReport {
    std::string axiom;
    bool passed = false;
    double tolerance = 0.0;
    int trials = 0;
    // replayable description of the first failing fixture: seeds, sizes,
    // model kind and the offending scores; empty when passed
    std::string witness;

    nlohmann::json to_json() const;
};

enum class Axiom {
    RobustLinearity,
    RobustDummyPlayer,
    RobustInterchangeability,
    RobustMonotonicity,
};

std::string axiom_name(Axiom a);

// Deterministic game with utility S -> E[v(S intersect staying set)].
// Semivalues of this game coincide with the deletion-robust scores.
CooperativeGame static_dual_game(const CooperativeGame& game, const DeletionModel& model);

// nu(S) = v(S intersect stayers) on the full original support; every
// deleted source is a null player of nu.
CooperativeGame post_deletion_utility(const CooperativeGame& game, Coalition stayers);

// Randomized checks with planted structure per axiom, exact computation
// only, tolerance 1e-9 (1e-12 for the monotone sign check).
AxiomReport check_axiom(Axiom axiom, int trials, std::uint64_t seed);

// Pads a random game with null players and compares the extended
// coefficients on the padded support against the smaller row on the
// restricted game.
AxiomReport check_npo_consistency(const SemivaluePrior& prior, int n, int num_null,
                                  std::uint64_t seed);

// Deletion-robust scores equal the semivalue of the static dual.
AxiomReport check_dual_equivalence(int trials, std::uint64_t seed);

// Scores of the post-deletion game at full support match the restricted
// game's scores at the smaller support (stayers only).
AxiomReport check_restriction_consistency(int trials, std::uint64_t seed);

// Test hook for generators used by the checks above.
DeletionModel make_random_deletion_model(int n, std::uint64_t seed);

}  // namespace delval
