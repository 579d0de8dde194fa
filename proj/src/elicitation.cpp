#include "lexlearn/elicitation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lexlearn {

namespace {

constexpr double kTieTolerance = 1e-12;

std::vector<std::string> diverse_candidates(const Ontology& o, std::size_t k) {
    // Each root child concept is one branch; entities hanging directly off the
    // root each form a branch of their own.
    std::vector<std::pair<std::string, std::vector<std::string>>> branches;
    for (const auto& c : o.child_concepts(o.root())) {
        branches.emplace_back(c, o.extension(c));
    }
    for (const auto& e : o.direct_entities(o.root())) {
        branches.emplace_back(e, std::vector<std::string>{e});
    }
    std::sort(branches.begin(), branches.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::string> out;
    for (std::size_t round = 0; out.size() < k; ++round) {
        bool any = false;
        for (const auto& [_, members] : branches) {
            if (round < members.size()) {
                any = true;
                out.push_back(members[round]);
                if (out.size() == k) {
                    break;
                }
            }
        }
        if (!any) {
            break;
        }
    }
    return out;
}

// Posterior mass of hypotheses whose extension meets the candidate set.
double coverage(const Ontology& o, const Posterior& p, std::span<const std::string> candidates) {
    const auto& space = p.space();
    double covered = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        for (const auto& c : candidates) {
            if (o.covers(space[i].node, c)) {
                covered += p.mass()[i];
                break;
            }
        }
    }
    return covered;
}

std::vector<std::string> infogain_candidates(const Ontology& o, const Posterior& p,
                                             std::size_t k) {
    std::vector<std::string> chosen;
    std::vector<std::string> pool;
    for (const auto& e : o.entities()) {
        pool.push_back(e.id);
    }
    std::sort(pool.begin(), pool.end());

    while (chosen.size() < k && !pool.empty()) {
        std::size_t best = 0;
        double best_h = 0.0;
        double best_cov = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto trial = chosen;
            trial.push_back(pool[i]);
            double h = expected_entropy_after(o, p, trial);
            double cov = coverage(o, p, trial);
            bool better = i == 0 || h < best_h - kTieTolerance ||
                          (std::abs(h - best_h) <= kTieTolerance && cov > best_cov + kTieTolerance);
            if (better) {
                best = i;
                best_h = h;
                best_cov = cov;
            }
        }
        chosen.push_back(pool[best]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return chosen;
}

}  // namespace

std::string_view to_string(Strategy s) {
    return s == Strategy::diverse ? "diverse" : "infogain";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "diverse") {
        return Strategy::diverse;
    }
    if (name == "infogain") {
        return Strategy::infogain;
    }
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void ElicitationConfig::validate(const Ontology& ontology) const {
    if (k < 1 || k > ontology.entities().size()) {
        throw std::invalid_argument("k must be between 1 and the number of entities (" +
                                    std::to_string(ontology.entities().size()) + ")");
    }
    if (!(commit_threshold > 0.0 && commit_threshold <= 1.0)) {
        throw std::invalid_argument("commit threshold must lie in (0, 1]");
    }
}

std::vector<std::string> select_candidates(const Ontology& ontology, const Posterior& p,
                                           const ElicitationConfig& cfg) {
    if (cfg.k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    auto k = std::min(cfg.k, ontology.entities().size());
    if (cfg.strategy == Strategy::diverse) {
        return diverse_candidates(ontology, k);
    }
    return infogain_candidates(ontology, p, k);
}

double expected_entropy_after(const Ontology& ontology, const Posterior& p,
                              std::span<const std::string> candidates) {
    const auto& space = p.space();
    const auto n = space.size();
    // Outcome index: position in `candidates`, or candidates.size() for "none".
    std::vector<std::vector<double>> joint(candidates.size() + 1, std::vector<double>(n, 0.0));
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < n; ++i) {
        double q = p.mass()[i];
        if (q <= 0.0) {
            continue;
        }
        hits.clear();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (ontology.covers(space[i].node, candidates[c])) {
                hits.push_back(c);
            }
        }
        if (hits.empty()) {
            joint.back()[i] = q;
            continue;
        }
        double share = q / static_cast<double>(hits.size());
        for (auto c : hits) {
            joint[c][i] = share;
        }
    }

    double expected = 0.0;
    for (const auto& outcome : joint) {
        double prob = 0.0;
        for (double v : outcome) {
            prob += v;
        }
        if (prob <= 0.0) {
            continue;
        }
        double h = 0.0;
        for (double v : outcome) {
            if (v > 0.0) {
                double cond = v / prob;
                h -= cond * std::log2(cond);
            }
        }
        expected += prob * h;
    }
    return expected <= 0.0 ? 0.0 : expected;
}

CommitDecision commit_decision(const Posterior& p, const ElicitationConfig& cfg) {
    auto map = map_hypothesis(p);
    CommitDecision d;
    d.commit = map.probability >= cfg.commit_threshold;
    d.node = std::move(map.node);
    d.probability = map.probability;
    d.exact = std::move(map.exact);
    return d;
}

}  // namespace lexlearn
