#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "lexlearn/ontology.hpp"

namespace lexlearn {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Depth class of a hypothesis: the root concept, any other concept, or an
/// individual entity.
enum class Level { general, specific, individual };

std::string_view to_string(Level level);

struct Hypothesis {
    std::string node;
    std::uint64_t prior_weight = 1;    // sibling_weight(node)
    std::uint64_t extension_size = 1;  // ext(node), always >= 1
    Level level = Level::individual;
};

/// Candidate meanings for one word: every ontology node with a nonempty
/// extension, ordered by node id, with sibling-count prior weights.
class HypothesisSpace {
public:
    HypothesisSpace(std::shared_ptr<const Ontology> ontology, std::string word);

    const std::string& word() const noexcept { return word_; }
    const Ontology& ontology() const noexcept { return *ontology_; }
    const std::shared_ptr<const Ontology>& ontology_ptr() const noexcept { return ontology_; }

    std::span<const Hypothesis> hypotheses() const noexcept { return hypotheses_; }
    std::size_t size() const noexcept { return hypotheses_.size(); }
    const Hypothesis& operator[](std::size_t i) const { return hypotheses_.at(i); }
    std::optional<std::size_t> index_of(std::string_view node) const;

    /// Unnormalized prior weight actually used in posterior arithmetic. Equals
    /// prior_weight unless the space was rescaled.
    const Rational& weight(std::size_t i) const { return weights_.at(i); }
    Rational prior_exact(std::size_t i) const { return weights_.at(i) / weight_sum_; }
    double prior(std::size_t i) const { return to_double(prior_exact(i)); }

    /// Same space with every prior weight multiplied by c (> 0).
    HypothesisSpace rescaled(const Rational& c) const;

private:
    std::shared_ptr<const Ontology> ontology_;
    std::string word_;
    std::vector<Hypothesis> hypotheses_;
    std::vector<Rational> weights_;
    Rational weight_sum_;
};

std::shared_ptr<const HypothesisSpace> build_space(std::shared_ptr<const Ontology> ontology,
                                                   std::string word);

/// Size-principle likelihood (1/ext(h))^n, or exactly 0 when some observation
/// falls outside h. Empty X gives 1. Throws UnknownEntity.
Rational likelihood(const Ontology& ontology, const Hypothesis& h,
                    std::span<const std::string> observations);

/// Normalized belief over a HypothesisSpace after observations X. Immutable.
class Posterior {
public:
    const HypothesisSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const HypothesisSpace>& space_ptr() const noexcept { return space_; }
    const std::string& word() const noexcept { return space_->word(); }
    const std::vector<std::string>& observations() const noexcept { return observations_; }
    std::size_t n() const noexcept { return observations_.size(); }

    std::span<const Rational> exact() const noexcept { return exact_; }
    std::span<const double> mass() const noexcept { return mass_; }
    /// Mass of a node; 0 for nodes outside the space.
    double mass_of(std::string_view node) const;

    /// {"word","n","mass":[{"node","level","p"}]} sorted by descending p, then node id.
    nlohmann::json to_json() const;

private:
    friend Posterior posterior_batch(std::shared_ptr<const HypothesisSpace>,
                                     std::vector<std::string>);
    friend Posterior posterior_update(const Posterior&, const std::string&);

    Posterior(std::shared_ptr<const HypothesisSpace> space, std::vector<std::string> observations,
              std::vector<Rational> unnormalized);

    std::shared_ptr<const HypothesisSpace> space_;
    std::vector<std::string> observations_;
    std::vector<Rational> exact_;
    std::vector<double> mass_;
};

/// mass(h) = w(h) * likelihood(h, X) / Z. Throws UnknownEntity, or
/// NoConsistentHypothesis when Z = 0 (unreachable for a single-rooted tree).
Posterior posterior_batch(std::shared_ptr<const HypothesisSpace> space,
                          std::vector<std::string> observations);

/// Incremental form: folds one more observation into p.
Posterior posterior_update(const Posterior& p, const std::string& observation);

struct MapEstimate {
    std::string node;
    double probability = 0.0;
    Rational exact;
};

/// Argmax mass; ties go to the smaller extension, then the smaller node id.
MapEstimate map_hypothesis(const Posterior& p);

/// Shannon entropy in bits, 0 log 0 := 0.
double entropy(std::span<const double> distribution);
double entropy(const Posterior& p);

}  // namespace lexlearn
