#include "lexlearn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lexlearn/errors.hpp"

namespace lexlearn {

std::string_view to_string(Level level) {
    switch (level) {
        case Level::general:
            return "general";
        case Level::specific:
            return "specific";
        case Level::individual:
            return "individual";
    }
    return "individual";
}

HypothesisSpace::HypothesisSpace(std::shared_ptr<const Ontology> ontology, std::string word)
    : ontology_(std::move(ontology)), word_(std::move(word)) {
    const auto& o = *ontology_;
    for (const auto& id : o.node_ids()) {
        auto ext = o.extension_size(id);
        if (ext == 0) {
            continue;  // 1/ext undefined
        }
        Level level = Level::individual;
        if (o.is_concept(id)) {
            level = id == o.root() ? Level::general : Level::specific;
        }
        hypotheses_.push_back(Hypothesis{id, o.sibling_weight(id), ext, level});
        weights_.emplace_back(hypotheses_.back().prior_weight);
    }
    weight_sum_ = std::accumulate(weights_.begin(), weights_.end(), Rational(0));
}

std::optional<std::size_t> HypothesisSpace::index_of(std::string_view node) const {
    auto it = std::lower_bound(hypotheses_.begin(), hypotheses_.end(), node,
                               [](const Hypothesis& h, std::string_view id) { return h.node < id; });
    if (it == hypotheses_.end() || it->node != node) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - hypotheses_.begin());
}

HypothesisSpace HypothesisSpace::rescaled(const Rational& c) const {
    if (c <= 0) {
        throw std::invalid_argument("prior scale factor must be positive");
    }
    HypothesisSpace out = *this;
    for (auto& w : out.weights_) {
        w *= c;
    }
    out.weight_sum_ *= c;
    return out;
}

std::shared_ptr<const HypothesisSpace> build_space(std::shared_ptr<const Ontology> ontology,
                                                   std::string word) {
    return std::make_shared<const HypothesisSpace>(std::move(ontology), std::move(word));
}

namespace {

void check_entity(const Ontology& o, const std::string& x) {
    if (!o.is_entity(x)) {
        throw UnknownEntity(x);
    }
}

// Likelihood factor contributed by a single observation.
Rational single_factor(const Ontology& o, const Hypothesis& h, const std::string& x) {
    if (!o.covers(h.node, x)) {
        return Rational(0);
    }
    return Rational(1, h.extension_size);
}

}  // namespace

Rational likelihood(const Ontology& ontology, const Hypothesis& h,
                    std::span<const std::string> observations) {
    for (const auto& x : observations) {
        check_entity(ontology, x);
    }
    for (const auto& x : observations) {
        if (!ontology.covers(h.node, x)) {
            return Rational(0);
        }
    }
    boost::multiprecision::cpp_int denom = boost::multiprecision::pow(
        boost::multiprecision::cpp_int(h.extension_size), static_cast<unsigned>(observations.size()));
    return Rational(1, denom);
}

Posterior::Posterior(std::shared_ptr<const HypothesisSpace> space,
                     std::vector<std::string> observations, std::vector<Rational> unnormalized)
    : space_(std::move(space)), observations_(std::move(observations)) {
    Rational z = std::accumulate(unnormalized.begin(), unnormalized.end(), Rational(0));
    if (z == 0) {
        throw NoConsistentHypothesis();
    }
    exact_ = std::move(unnormalized);
    mass_.reserve(exact_.size());
    for (auto& m : exact_) {
        m /= z;
        mass_.push_back(to_double(m));
    }
}

double Posterior::mass_of(std::string_view node) const {
    auto i = space_->index_of(node);
    return i ? mass_[*i] : 0.0;
}

nlohmann::json Posterior::to_json() const {
    std::vector<std::size_t> order(exact_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        if (exact_[a] != exact_[b]) {
            return exact_[a] > exact_[b];
        }
        return (*space_)[a].node < (*space_)[b].node;
    });
    auto entries = nlohmann::json::array();
    for (auto i : order) {
        const auto& h = (*space_)[i];
        entries.push_back({{"node", h.node}, {"level", to_string(h.level)}, {"p", mass_[i]}});
    }
    return {{"word", word()}, {"n", n()}, {"mass", std::move(entries)}};
}

Posterior posterior_batch(std::shared_ptr<const HypothesisSpace> space,
                          std::vector<std::string> observations) {
    const auto& o = space->ontology();
    std::vector<Rational> unnormalized;
    unnormalized.reserve(space->size());
    for (std::size_t i = 0; i < space->size(); ++i) {
        unnormalized.push_back(space->weight(i) * likelihood(o, (*space)[i], observations));
    }
    return Posterior(std::move(space), std::move(observations), std::move(unnormalized));
}

Posterior posterior_update(const Posterior& p, const std::string& observation) {
    const auto& space = p.space();
    check_entity(space.ontology(), observation);
    std::vector<Rational> unnormalized;
    unnormalized.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (p.exact_[i] == 0) {
            unnormalized.emplace_back(0);
            continue;
        }
        unnormalized.push_back(p.exact_[i] * single_factor(space.ontology(), space[i], observation));
    }
    auto observations = p.observations_;
    observations.push_back(observation);
    return Posterior(p.space_, std::move(observations), std::move(unnormalized));
}

MapEstimate map_hypothesis(const Posterior& p) {
    const auto& space = p.space();
    std::size_t best = 0;
    for (std::size_t i = 1; i < space.size(); ++i) {
        const auto& cur = p.exact()[i];
        const auto& top = p.exact()[best];
        if (cur > top ||
            (cur == top && space[i].extension_size < space[best].extension_size)) {
            best = i;
        }
        // Equal mass and extension: the earlier (smaller) id already wins.
    }
    return MapEstimate{space[best].node, p.mass()[best], p.exact()[best]};
}

double entropy(std::span<const double> distribution) {
    double h = 0.0;
    for (double q : distribution) {
        if (q > 0.0) {
            h -= q * std::log2(q);
        }
    }
    return h == 0.0 ? 0.0 : h;  // avoid -0
}

double entropy(const Posterior& p) { return entropy(p.mass()); }

}  // namespace lexlearn
