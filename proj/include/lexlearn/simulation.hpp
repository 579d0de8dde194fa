#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexlearn/elicitation.hpp"
#include "lexlearn/inference.hpp"
#include "lexlearn/ontology.hpp"

namespace lexlearn {

// ---------------------------------------------------------------------------
// Scenario: one word, a fixed observation sequence, the posterior trajectory.
// ---------------------------------------------------------------------------

struct HypothesisMass {
    std::string node;
    Level level = Level::individual;
    double p = 0.0;

    bool operator==(const HypothesisMass&) const = default;
};

struct ScenarioStep {
    std::size_t step = 0;                    // 0 is the prior
    std::optional<std::string> observation;  // entity folded in at this step
    std::vector<HypothesisMass> mass;        // descending p, then node id
    std::string map_node;
    double map_p = 0.0;
    double entropy = 0.0;

    bool operator==(const ScenarioStep&) const = default;
};

struct ScenarioResult {
    std::string word;
    std::vector<std::string> observations;
    std::vector<ScenarioStep> steps;  // observations.size() + 1 entries
    std::optional<std::size_t> commit_step;
    std::optional<std::string> committed_node;

    bool operator==(const ScenarioResult&) const = default;

    nlohmann::json to_json() const;
    static ScenarioResult from_json(const nlohmann::json& j);
};

/// Accepts an entity id, or an entity label that matches exactly one entity
/// (exact match first, then case-insensitive). Throws UnknownEntity.
std::string resolve_entity(const Ontology& ontology, std::string_view id_or_label);

/// Folds the observations one at a time with posterior_update. The commit
/// step is the first step >= 1 at which commit_decision commits.
ScenarioResult run_scenario(std::shared_ptr<const Ontology> ontology, const std::string& word,
                            std::span<const std::string> observations,
                            const ElicitationConfig& cfg);

// ---------------------------------------------------------------------------
// Batch: simulated cooperative users against competing learners.
// ---------------------------------------------------------------------------

enum class Learner { bayes, rule_intersection, frequency_baseline };

std::string_view to_string(Learner l);
Learner parse_learner(std::string_view name);

struct GeneratorSpec {
    std::size_t depth = 2;   // concept levels below the root
    std::size_t branch = 2;  // child concepts per concept
    std::size_t leaves = 3;  // entities per leaf concept

    /// "depth:D,branch:B,leaves:E"; throws std::invalid_argument.
    static GeneratorSpec parse(std::string_view text);
};

/// Complete tree: root "c", children "c.0", "c.1", ...; leaf concepts carry
/// entities "c.0.1/e0", ... Throws std::invalid_argument when too large.
Ontology generate_tree(const GeneratorSpec& spec);

struct BatchOptions {
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    Learner learner = Learner::bayes;
    std::optional<std::string> target;  // random concept per trial when absent
    std::size_t max_observations = 10;
    ElicitationConfig elicitation;
    unsigned threads = 1;
};

struct TrialOutcome {
    std::string target;
    std::vector<std::string> observations;
    std::optional<std::size_t> identified_at;

    bool operator==(const TrialOutcome&) const = default;
};

struct BatchReport {
    Learner learner = Learner::bayes;
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::optional<double> mean_observations;
    std::optional<double> median_observations;
    std::vector<TrialOutcome> outcomes;

    bool operator==(const BatchReport&) const = default;

    nlohmann::json to_json() const;
};

/// Observations the learner needs before it settles on `target`, or nullopt
/// if it never does within the sequence (or bayes commits to something else).
///
///   bayes               commit_decision commits to target
///   rule_intersection   the nodes consistent with every observation are {target}
///   frequency_baseline  target is the unique node covering the most observations
std::optional<std::size_t> observations_to_identify(Learner learner,
                                                    std::shared_ptr<const HypothesisSpace> space,
                                                    const std::string& target,
                                                    std::span<const std::string> observations,
                                                    const ElicitationConfig& cfg);

/// Deterministic in the seed; the thread count does not affect the result.
/// Throws std::invalid_argument for bad options or an unknown target.
BatchReport run_batch(std::shared_ptr<const Ontology> ontology, const BatchOptions& options);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { table, json, csv };

ReportFormat parse_report_format(std::string_view name);

std::string render(const ScenarioResult& result, ReportFormat format);
std::string render(const BatchReport& report, ReportFormat format);

/// Writes the rendering to `out` (atomically), or returns it when `out` is
/// empty. Throws StorageUnavailable.
std::string emit_report(const ScenarioResult& result, ReportFormat format,
                        const std::filesystem::path& out = {});
std::string emit_report(const BatchReport& report, ReportFormat format,
                        const std::filesystem::path& out = {});

}  // namespace lexlearn
