#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexlearn/inference.hpp"
#include "lexlearn/ontology.hpp"

namespace lexlearn {

enum class Strategy { diverse, infogain };

std::string_view to_string(Strategy s);
/// Throws std::invalid_argument for anything but "diverse" / "infogain".
Strategy parse_strategy(std::string_view name);

struct ElicitationConfig {
    std::size_t k = 3;
    Strategy strategy = Strategy::infogain;
    double commit_threshold = 0.9;
    std::uint64_t seed = 0;  // reserved; every tie-break is deterministic

    /// Throws std::invalid_argument unless 1 <= k <= entity count and 0 < threshold <= 1.
    void validate(const Ontology& ontology) const;
};

/// Pick up to k distinct example entities to show the user.
///
/// diverse cycles over the root's branches in id order, taking the smallest
/// remaining entity id from each. infogain greedily adds the entity that
/// minimises expected_entropy_after; ties prefer the set more likely to
/// contain a pickable entity, then the smaller id.
std::vector<std::string> select_candidates(const Ontology& ontology, const Posterior& p,
                                           const ElicitationConfig& cfg);

/// Expected posterior entropy (bits) after showing `candidates`, under the
/// user-choice model: with true hypothesis h the user picks uniformly from
/// candidates within ext(h), or answers "none of these" if there are none.
double expected_entropy_after(const Ontology& ontology, const Posterior& p,
                              std::span<const std::string> candidates);

struct CommitDecision {
    bool commit = false;
    std::string node;  // MAP node, set in both cases
    double probability = 0.0;
    Rational exact;
};

/// Commit iff the MAP probability reaches the threshold.
CommitDecision commit_decision(const Posterior& p, const ElicitationConfig& cfg);

}  // namespace lexlearn
