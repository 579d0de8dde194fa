#include "lexlearn/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lexlearn/errors.hpp"
#include "lexlearn/storage.hpp"

namespace lexlearn {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

ScenarioStep make_step(std::size_t step, std::optional<std::string> observation,
                       const Posterior& p) {
    ScenarioStep s;
    s.step = step;
    s.observation = std::move(observation);
    auto j = p.to_json();
    for (const auto& m : j["mass"]) {
        const auto& space = p.space();
        auto idx = space.index_of(m["node"].get<std::string>());
        s.mass.push_back(HypothesisMass{space[*idx].node, space[*idx].level, p.mass()[*idx]});
    }
    auto map = map_hypothesis(p);
    s.map_node = map.node;
    s.map_p = map.probability;
    s.entropy = entropy(p);
    return s;
}

Level parse_level(const std::string& s) {
    if (s == "general") return Level::general;
    if (s == "specific") return Level::specific;
    if (s == "individual") return Level::individual;
    throw std::invalid_argument("unknown level '" + s + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

nlohmann::json ScenarioResult::to_json() const {
    auto steps_json = nlohmann::json::array();
    for (const auto& s : steps) {
        auto mass = nlohmann::json::array();
        for (const auto& m : s.mass) {
            mass.push_back({{"node", m.node}, {"level", to_string(m.level)}, {"p", m.p}});
        }
        steps_json.push_back({{"step", s.step},
                              {"observation", s.observation ? nlohmann::json(*s.observation)
                                                            : nlohmann::json(nullptr)},
                              {"map", {{"node", s.map_node}, {"p", s.map_p}}},
                              {"entropy", s.entropy},
                              {"mass", std::move(mass)}});
    }
    return {{"word", word},
            {"observations", observations},
            {"commit_step", commit_step ? nlohmann::json(*commit_step) : nlohmann::json(nullptr)},
            {"committed_node",
             committed_node ? nlohmann::json(*committed_node) : nlohmann::json(nullptr)},
            {"steps", std::move(steps_json)}};
}

ScenarioResult ScenarioResult::from_json(const nlohmann::json& j) {
    ScenarioResult r;
    r.word = j.at("word").get<std::string>();
    r.observations = j.at("observations").get<std::vector<std::string>>();
    if (!j.at("commit_step").is_null()) r.commit_step = j["commit_step"].get<std::size_t>();
    if (!j.at("committed_node").is_null()) r.committed_node = j["committed_node"].get<std::string>();
    for (const auto& s : j.at("steps")) {
        ScenarioStep step;
        step.step = s.at("step").get<std::size_t>();
        if (!s.at("observation").is_null()) step.observation = s["observation"].get<std::string>();
        step.map_node = s.at("map").at("node").get<std::string>();
        step.map_p = s["map"].at("p").get<double>();
        step.entropy = s.at("entropy").get<double>();
        for (const auto& m : s.at("mass")) {
            step.mass.push_back(HypothesisMass{m.at("node").get<std::string>(),
                                               parse_level(m.at("level").get<std::string>()),
                                               m.at("p").get<double>()});
        }
        r.steps.push_back(std::move(step));
    }
    return r;
}

std::string resolve_entity(const Ontology& ontology, std::string_view id_or_label) {
    if (ontology.is_entity(id_or_label)) {
        return std::string(id_or_label);
    }
    for (bool fold : {false, true}) {
        std::vector<std::string> hits;
        for (const auto& e : ontology.entities()) {
            bool match = fold ? lower(e.label) == lower(id_or_label) : e.label == id_or_label;
            if (match) hits.push_back(e.id);
        }
        if (hits.size() == 1) {
            return hits.front();
        }
        if (hits.size() > 1) {
            break;  // ambiguous label
        }
    }
    throw UnknownEntity(std::string(id_or_label));
}

ScenarioResult run_scenario(std::shared_ptr<const Ontology> ontology, const std::string& word,
                            std::span<const std::string> observations,
                            const ElicitationConfig& cfg) {
    std::vector<std::string> ids;
    for (const auto& o : observations) {
        ids.push_back(resolve_entity(*ontology, o));
    }

    ScenarioResult result;
    result.word = word;
    result.observations = ids;
    auto p = posterior_batch(build_space(ontology, word), {});
    result.steps.push_back(make_step(0, std::nullopt, p));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        p = posterior_update(p, ids[i]);
        result.steps.push_back(make_step(i + 1, ids[i], p));
        if (!result.commit_step) {
            auto d = commit_decision(p, cfg);
            if (d.commit) {
                result.commit_step = i + 1;
                result.committed_node = d.node;
            }
        }
    }
    return result;
}

std::string_view to_string(Learner l) {
    switch (l) {
        case Learner::bayes:
            return "bayes";
        case Learner::rule_intersection:
            return "rule_intersection";
        case Learner::frequency_baseline:
            return "frequency_baseline";
    }
    return "bayes";
}

Learner parse_learner(std::string_view name) {
    for (auto l : {Learner::bayes, Learner::rule_intersection, Learner::frequency_baseline}) {
        if (to_string(l) == name) return l;
    }
    throw std::invalid_argument("unknown learner '" + std::string(name) + "'");
}

GeneratorSpec GeneratorSpec::parse(std::string_view text) {
    GeneratorSpec spec;
    bool seen[3] = {false, false, false};
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
        auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("generator spec item '" + std::string(item) +
                                        "' is not key:value");
        }
        auto key = item.substr(0, colon);
        auto val = item.substr(colon + 1);
        std::size_t n = 0;
        auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), n);
        if (ec != std::errc() || ptr != val.data() + val.size()) {
            throw std::invalid_argument("generator spec value '" + std::string(val) +
                                        "' is not a non-negative integer");
        }
        int slot = key == "depth" ? 0 : key == "branch" ? 1 : key == "leaves" ? 2 : -1;
        if (slot < 0) {
            throw std::invalid_argument("unknown generator key '" + std::string(key) + "'");
        }
        if (seen[slot]) {
            throw std::invalid_argument("generator key '" + std::string(key) + "' repeated");
        }
        seen[slot] = true;
        (slot == 0 ? spec.depth : slot == 1 ? spec.branch : spec.leaves) = n;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (!seen[0] || !seen[1] || !seen[2]) {
        throw std::invalid_argument("generator spec needs depth, branch and leaves");
    }
    if (spec.leaves == 0 || (spec.depth > 0 && spec.branch == 0)) {
        throw std::invalid_argument("generator spec must yield at least one entity");
    }
    return spec;
}

Ontology generate_tree(const GeneratorSpec& spec) {
    constexpr double kMaxNodes = 200000;
    double leaves = std::pow(static_cast<double>(spec.branch), static_cast<double>(spec.depth));
    if (leaves * static_cast<double>(spec.leaves + 2) > kMaxNodes) {
        throw std::invalid_argument("generated tree would be too large");
    }
    auto concepts = nlohmann::json::array();
    auto entities = nlohmann::json::array();
    std::vector<std::string> level{"c"};
    concepts.push_back({{"id", "c"}, {"label", "Concept c"}, {"parent", nullptr}});
    for (std::size_t d = 0; d < spec.depth; ++d) {
        std::vector<std::string> next;
        for (const auto& parent : level) {
            for (std::size_t b = 0; b < spec.branch; ++b) {
                auto id = parent + "." + std::to_string(b);
                concepts.push_back({{"id", id}, {"label", "Concept " + id}, {"parent", parent}});
                next.push_back(id);
            }
        }
        level = std::move(next);
    }
    for (const auto& leaf : level) {
        for (std::size_t e = 0; e < spec.leaves; ++e) {
            auto id = leaf + "/e" + std::to_string(e);
            entities.push_back({{"id", id}, {"label", "Entity " + id}, {"concept", leaf}});
        }
    }
    return Ontology::from_json({{"concepts", concepts}, {"entities", entities}});
}

nlohmann::json BatchReport::to_json() const {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return {{"learner", to_string(learner)},
            {"trials", trials},
            {"successes", successes},
            {"failures", failures},
            {"mean_observations", opt(mean_observations)},
            {"median_observations", opt(median_observations)}};
}

std::optional<std::size_t> observations_to_identify(Learner learner,
                                                    std::shared_ptr<const HypothesisSpace> space,
                                                    const std::string& target,
                                                    std::span<const std::string> observations,
                                                    const ElicitationConfig& cfg) {
    const auto& o = space->ontology();
    switch (learner) {
        case Learner::bayes: {
            auto p = posterior_batch(space, {});
            for (std::size_t n = 0; n < observations.size(); ++n) {
                p = posterior_update(p, observations[n]);
                auto d = commit_decision(p, cfg);
                if (d.commit) {
                    return d.node == target ? std::optional<std::size_t>(n + 1) : std::nullopt;
                }
            }
            return std::nullopt;
        }
        case Learner::rule_intersection: {
            for (std::size_t n = 0; n < observations.size(); ++n) {
                std::vector<std::string> consistent;
                for (const auto& h : space->hypotheses()) {
                    bool all = std::all_of(observations.begin(),
                                           observations.begin() + static_cast<std::ptrdiff_t>(n + 1),
                                           [&](const std::string& x) { return o.covers(h.node, x); });
                    if (all) consistent.push_back(h.node);
                }
                if (consistent.size() == 1 && consistent.front() == target) {
                    return n + 1;
                }
            }
            return std::nullopt;
        }
        case Learner::frequency_baseline: {
            std::vector<std::size_t> counts(space->size(), 0);
            for (std::size_t n = 0; n < observations.size(); ++n) {
                for (std::size_t i = 0; i < space->size(); ++i) {
                    if (o.covers((*space)[i].node, observations[n])) ++counts[i];
                }
                auto top = *std::max_element(counts.begin(), counts.end());
                auto leaders = std::count(counts.begin(), counts.end(), top);
                if (leaders == 1) {
                    auto i = static_cast<std::size_t>(
                        std::find(counts.begin(), counts.end(), top) - counts.begin());
                    if ((*space)[i].node == target) return n + 1;
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

BatchReport run_batch(std::shared_ptr<const Ontology> ontology, const BatchOptions& options) {
    if (options.trials == 0) {
        throw std::invalid_argument("trials must be positive");
    }
    if (options.max_observations == 0) {
        throw std::invalid_argument("max_observations must be positive");
    }
    auto space = build_space(ontology, "batch");
    std::vector<std::string> targets;
    if (options.target) {
        if (!space->index_of(*options.target)) {
            throw std::invalid_argument("target '" + *options.target +
                                        "' is not a node with a nonempty extension");
        }
    } else {
        for (const auto& h : space->hypotheses()) {
            if (ontology->is_concept(h.node)) targets.push_back(h.node);
        }
    }

    auto run_trial = [&](std::size_t t) {
        std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(t)));
        TrialOutcome out;
        if (options.target) {
            out.target = *options.target;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
            out.target = targets[pick(rng)];
        }
        auto ext = ontology->extension(out.target);
        std::uniform_int_distribution<std::size_t> draw(0, ext.size() - 1);
        for (std::size_t i = 0; i < options.max_observations; ++i) {
            out.observations.push_back(ext[draw(rng)]);
        }
        out.identified_at = observations_to_identify(options.learner, space, out.target,
                                                     out.observations, options.elicitation);
        return out;
    };

    BatchReport report;
    report.learner = options.learner;
    report.trials = options.trials;
    report.outcomes.resize(options.trials);
    unsigned threads = std::max(1u, options.threads);
    if (threads == 1) {
        for (std::size_t t = 0; t < options.trials; ++t) report.outcomes[t] = run_trial(t);
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < threads; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t t = w; t < options.trials; t += threads) {
                    report.outcomes[t] = run_trial(t);
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }

    std::vector<double> counts;
    for (const auto& o : report.outcomes) {
        if (o.identified_at) counts.push_back(static_cast<double>(*o.identified_at));
    }
    report.successes = counts.size();
    report.failures = report.trials - report.successes;
    if (!counts.empty()) {
        report.mean_observations =
            std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
        std::sort(counts.begin(), counts.end());
        auto mid = counts.size() / 2;
        report.median_observations =
            counts.size() % 2 ? counts[mid] : (counts[mid - 1] + counts[mid]) / 2.0;
    }
    return report;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") return ReportFormat::table;
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown format '" + std::string(name) + "'");
}

std::string render(const ScenarioResult& result, ReportFormat format) {
    if (format == ReportFormat::json) {
        return result.to_json().dump(2) + "\n";
    }
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "step,node,p\n";
        for (const auto& s : result.steps) {
            for (const auto& m : s.mass) {
                out << s.step << ',' << m.node << ',' << format_double(m.p) << '\n';
            }
        }
        return out.str();
    }

    char line[160];
    out << "word: " << result.word << '\n';
    for (const auto& s : result.steps) {
        out << "\nstep " << s.step;
        if (s.observation) {
            out << "  observed " << *s.observation;
        } else {
            out << "  prior";
        }
        std::snprintf(line, sizeof line, "  MAP %s (%.6f)  entropy %.6f bits\n", s.map_node.c_str(),
                      s.map_p, s.entropy);
        out << line;
        for (const auto& m : s.mass) {
            std::snprintf(line, sizeof line, "  %-28s %-10s %.6f\n", m.node.c_str(),
                          std::string(to_string(m.level)).c_str(), m.p);
            out << line;
        }
    }
    if (result.commit_step) {
        out << "\ncommitted '" << result.word << "' -> " << *result.committed_node << " at step "
            << *result.commit_step << '\n';
    } else {
        out << "\nno commit\n";
    }
    return out.str();
}

std::string render(const BatchReport& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        return report.to_json().dump(2) + "\n";
    }
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "learner,trials,successes,failures,mean_observations,median_observations\n";
        out << to_string(report.learner) << ',' << report.trials << ',' << report.successes << ','
            << report.failures << ',' << opt(report.mean_observations) << ','
            << opt(report.median_observations) << '\n';
        return out.str();
    }
    out << "learner             " << to_string(report.learner) << '\n'
        << "trials              " << report.trials << '\n'
        << "identified          " << report.successes << '\n'
        << "failures            " << report.failures << '\n'
        << "mean observations   " << (report.mean_observations ? opt(report.mean_observations) : "-")
        << '\n'
        << "median observations "
        << (report.median_observations ? opt(report.median_observations) : "-") << '\n';
    return out.str();
}

namespace {

std::string emit(std::string text, const std::filesystem::path& out) {
    if (!out.empty()) {
        write_file_atomic(out, text);
    }
    return text;
}

}  // namespace

std::string emit_report(const ScenarioResult& result, ReportFormat format,
                        const std::filesystem::path& out) {
    return emit(render(result, format), out);
}

std::string emit_report(const BatchReport& report, ReportFormat format,
                        const std::filesystem::path& out) {
    return emit(render(report, format), out);
}

}  // namespace lexlearn
