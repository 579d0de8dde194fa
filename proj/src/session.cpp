#include "lexlearn/session.hpp"

#include <algorithm>
#include <map>

#include "lexlearn/errors.hpp"
#include "lexlearn/storage.hpp"

namespace lexlearn {

nlohmann::json to_json(const Elicitation& e) {
    auto candidates = nlohmann::json::array();
    for (const auto& c : e.candidates) {
        candidates.push_back({{"id", c.id}, {"label", c.label}});
    }
    return {{"type", "elicitation"}, {"word", e.word}, {"candidates", std::move(candidates)}};
}

nlohmann::json to_json(const Answer& a) {
    auto bindings = nlohmann::json::array();
    for (const auto& b : a.bindings) {
        bindings.push_back({{"term", b.term}, {"node", b.node}, {"source", b.source}});
    }
    return {{"type", "answer"}, {"bindings", std::move(bindings)}};
}

nlohmann::json to_json(const BotReply& reply) {
    return std::visit([](const auto& r) { return to_json(r); }, reply);
}

std::string_view to_string(EpisodeStatus s) {
    switch (s) {
        case EpisodeStatus::awaiting_selection:
            return "awaiting_selection";
        case EpisodeStatus::committed:
            return "committed";
        case EpisodeStatus::abandoned:
            return "abandoned";
    }
    return "abandoned";
}

nlohmann::json SelectionResult::to_json() const {
    nlohmann::json out{{"posterior", posterior.to_json()},
                       {"status", decision.commit ? "committed" : "learning"}};
    if (decision.commit) {
        out["committed_node"] = decision.node;
        out["confidence"] = decision.probability;
    }
    if (next) {
        out["next"] = lexlearn::to_json(*next);
    }
    return out;
}

Session::Session(std::shared_ptr<const Ontology> ontology, std::shared_ptr<Lexicon> lexicon,
                 SessionOptions options, EventLog log)
    : ontology_(std::move(ontology)),
      lexicon_(std::move(lexicon)),
      options_(std::move(options)),
      log_(std::move(log)) {
    if (!options_.clock) {
        options_.clock = utc_timestamp;
    }
    options_.elicitation.validate(*ontology_);

    // Concepts win label collisions, then the smaller id.
    std::map<std::string, std::string> index;
    auto add = [&](const std::string& label, const std::string& id) {
        auto tokens = tokenize(label);
        label_tokens_.insert(tokens.begin(), tokens.end());
        std::string key;
        for (const auto& t : tokens) {
            key += key.empty() ? t : " " + t;
        }
        if (!key.empty()) {
            index.try_emplace(key, id);
        }
    };
    std::vector<std::string> concept_ids, entity_ids;
    for (const auto& c : ontology_->concepts()) concept_ids.push_back(c.id);
    for (const auto& e : ontology_->entities()) entity_ids.push_back(e.id);
    std::sort(concept_ids.begin(), concept_ids.end());
    std::sort(entity_ids.begin(), entity_ids.end());
    for (const auto& id : concept_ids) add(ontology_->label(id), id);
    for (const auto& id : entity_ids) add(ontology_->label(id), id);
    label_index_.assign(index.begin(), index.end());
}

LearningEpisode* Session::active() {
    if (!episodes_.empty() && episodes_.back().status == EpisodeStatus::awaiting_selection) {
        return &episodes_.back();
    }
    return nullptr;
}

const LearningEpisode* Session::active_episode() const {
    return const_cast<Session*>(this)->active();
}

Vocabulary Session::vocabulary() const {
    Vocabulary vocab = options_.stopwords;
    vocab.insert(label_tokens_.begin(), label_tokens_.end());
    for (auto& w : lexicon_->words()) {
        vocab.insert(std::move(w));
    }
    return vocab;
}

std::vector<Binding> Session::resolve_bindings(std::string_view text) const {
    std::vector<Binding> out;
    auto seen = [&out](const std::string& term) {
        return std::any_of(out.begin(), out.end(), [&](const Binding& b) { return b.term == term; });
    };
    for (const auto& token : tokenize(text)) {
        if (is_numeric_token(token) || options_.stopwords.contains(token)) {
            continue;
        }
        for (const auto& form : {token, singular_form(token)}) {
            if (auto entry = lexicon_->lookup(form)) {
                if (!seen(form)) out.push_back(Binding{form, entry->node, "lexicon"});
                break;
            }
            auto it = std::lower_bound(label_index_.begin(), label_index_.end(), form,
                                       [](const auto& kv, const std::string& k) { return kv.first < k; });
            if (it != label_index_.end() && it->first == form) {
                if (!seen(form)) out.push_back(Binding{form, it->second, "label"});
                break;
            }
        }
    }
    return out;
}

Elicitation Session::elicitation_for(const LearningEpisode& ep) const {
    Elicitation e{ep.word, {}};
    for (const auto& id : ep.pending_candidates) {
        e.candidates.push_back(Candidate{id, ontology_->label(id)});
    }
    return e;
}

nlohmann::json Session::elicitation_payload(const LearningEpisode& ep) const {
    return {{"word", ep.word},
            {"candidates", ep.pending_candidates},
            {"queue", std::vector<std::string>(queue_.begin(), queue_.end())}};
}

LearningEpisode& Session::open_episode(const std::string& word) {
    auto prior = posterior_batch(build_space(ontology_, word), {});
    auto candidates = select_candidates(*ontology_, prior, options_.elicitation);
    episodes_.push_back(LearningEpisode{word, {}, std::move(prior),
                                        EpisodeStatus::awaiting_selection, std::move(candidates)});
    return episodes_.back();
}

std::optional<Elicitation> Session::open_next_queued() {
    while (!queue_.empty()) {
        auto word = queue_.front();
        queue_.pop_front();
        if (lexicon_->contains(word)) {
            continue;  // learned elsewhere while it waited
        }
        auto& ep = open_episode(word);
        record(EventKind::bot_elicitation, elicitation_payload(ep));
        return elicitation_for(ep);
    }
    return std::nullopt;
}

void Session::record(EventKind kind, nlohmann::json payload, std::string ts) {
    if (ts.empty()) {
        ts = options_.clock();
    }
    log_.append(SessionEvent{log_.next_seq(), std::move(ts), kind, std::move(payload)});
}

BotReply Session::handle_message(std::string_view text) {
    if (closed_) {
        throw SessionClosed();
    }
    record(EventKind::user_message, {{"text", std::string(text)}});

    auto unknown = detect_unknown_terms(text, vocabulary());
    auto enqueue = [this](const std::string& w) {
        if (std::find(queue_.begin(), queue_.end(), w) == queue_.end()) {
            queue_.push_back(w);
        }
    };

    if (auto* ep = active()) {
        // Keep the current episode; new words wait their turn.
        for (const auto& w : unknown) {
            if (w != ep->word) enqueue(w);
        }
        if (!unknown.empty()) {
            record(EventKind::bot_elicitation, elicitation_payload(*ep));
            return elicitation_for(*ep);
        }
    } else {
        for (const auto& w : unknown) enqueue(w);
        if (auto next = open_next_queued()) {
            return *next;
        }
    }

    Answer answer{resolve_bindings(text)};
    record(EventKind::bot_answer, to_json(answer));
    return answer;
}

SelectionResult Session::handle_selection(std::string_view word_in, std::string_view entity_in) {
    if (closed_) {
        throw SessionClosed();
    }
    std::string word(word_in);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string entity(entity_in);

    auto* ep = active();
    if (ep == nullptr || ep->word != word) {
        throw NoActiveEpisode(word);
    }
    if (!ontology_->is_entity(entity)) {
        throw UnknownEntity(entity);
    }
    if (std::find(ep->pending_candidates.begin(), ep->pending_candidates.end(), entity) ==
        ep->pending_candidates.end()) {
        throw CandidateNotOffered(word, entity);
    }

    record(EventKind::user_selection, {{"word", word}, {"entity", entity}});
    ep->posterior = posterior_update(ep->posterior, entity);
    ep->observations.push_back(entity);
    auto decision = commit_decision(ep->posterior, options_.elicitation);

    SelectionResult result{ep->posterior, decision, std::nullopt};
    if (decision.commit) {
        auto ts = options_.clock();
        lexicon_->commit(word, LexiconEntry{decision.node, decision.probability,
                                            ep->observations.size(), ts});
        ep->status = EpisodeStatus::committed;
        ep->pending_candidates.clear();
        record(EventKind::bot_commit,
               {{"word", word},
                {"node", decision.node},
                {"confidence", decision.probability},
                {"n", ep->observations.size()}},
               ts);
        result.next = open_next_queued();
    } else {
        ep->pending_candidates = select_candidates(*ontology_, ep->posterior, options_.elicitation);
        record(EventKind::bot_elicitation, elicitation_payload(*ep));
        result.next = elicitation_for(*ep);
    }
    return result;
}

void Session::close() {
    if (auto* ep = active()) {
        ep->status = EpisodeStatus::abandoned;
        ep->pending_candidates.clear();
    }
    queue_.clear();
    closed_ = true;
}

std::optional<Posterior> Session::posterior_for(std::string_view word) const {
    for (auto it = episodes_.rbegin(); it != episodes_.rend(); ++it) {
        if (it->word == word) {
            return it->posterior;
        }
    }
    if (std::find(queue_.begin(), queue_.end(), word) != queue_.end()) {
        return posterior_batch(build_space(ontology_, std::string(word)), {});
    }
    return std::nullopt;
}

nlohmann::json Session::state_json() const {
    auto episodes = nlohmann::json::array();
    for (const auto& ep : episodes_) {
        episodes.push_back({{"word", ep.word},
                            {"observations", ep.observations},
                            {"status", to_string(ep.status)},
                            {"pending_candidates", ep.pending_candidates},
                            {"posterior", ep.posterior.to_json()}});
    }
    return {{"episodes", std::move(episodes)},
            {"queue", std::vector<std::string>(queue_.begin(), queue_.end())}};
}

namespace {

std::string payload_string(const SessionEvent& e, const char* key) {
    const auto& p = e.payload;
    if (!p.contains(key) || !p[key].is_string()) {
        throw CorruptLog("event " + std::to_string(e.seq) + " (" + std::string(to_string(e.kind)) +
                         "): payload lacks string '" + key + "'");
    }
    return p[key].get<std::string>();
}

std::vector<std::string> payload_strings(const SessionEvent& e, const char* key) {
    const auto& p = e.payload;
    if (!p.contains(key) || !p[key].is_array()) {
        throw CorruptLog("event " + std::to_string(e.seq) + ": payload lacks array '" + key + "'");
    }
    std::vector<std::string> out;
    for (const auto& v : p[key]) {
        if (!v.is_string()) {
            throw CorruptLog("event " + std::to_string(e.seq) + ": '" + key + "' holds non-strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

Session Session::replay(const std::vector<SessionEvent>& events,
                        std::shared_ptr<const Ontology> ontology, std::shared_ptr<Lexicon> lexicon,
                        SessionOptions options, std::optional<std::filesystem::path> log_file,
                        bool apply_commits) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].seq != i + 1) {
            throw CorruptLog("expected seq " + std::to_string(i + 1) + ", found " +
                             std::to_string(events[i].seq));
        }
    }

    Session s(std::move(ontology), std::move(lexicon), std::move(options),
              log_file ? EventLog(*log_file, events) : EventLog());
    if (!log_file) {
        for (const auto& e : events) s.log_.append(e);
    }

    auto fail = [](const SessionEvent& e, const std::string& why) {
        return CorruptLog("event " + std::to_string(e.seq) + " (" + std::string(to_string(e.kind)) +
                          "): " + why);
    };

    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::user_message:
                payload_string(e, "text");
                break;
            case EventKind::bot_answer:
                if (!e.payload.contains("bindings")) throw fail(e, "missing bindings");
                break;
            case EventKind::bot_elicitation: {
                auto word = payload_string(e, "word");
                auto candidates = payload_strings(e, "candidates");
                auto queue = payload_strings(e, "queue");
                if (candidates.empty()) throw fail(e, "no candidates");
                for (const auto& c : candidates) {
                    if (!s.ontology_->is_entity(c)) throw fail(e, "unknown entity '" + c + "'");
                }
                auto* ep = s.active();
                if (ep == nullptr) {
                    ep = &s.episodes_.emplace_back(LearningEpisode{
                        word, {}, posterior_batch(build_space(s.ontology_, word), {}),
                        EpisodeStatus::awaiting_selection, {}});
                } else if (ep->word != word) {
                    throw fail(e, "elicitation for '" + word + "' while '" + ep->word + "' is open");
                }
                ep->pending_candidates = std::move(candidates);
                s.queue_.assign(queue.begin(), queue.end());
                break;
            }
            case EventKind::user_selection: {
                auto word = payload_string(e, "word");
                auto entity = payload_string(e, "entity");
                auto* ep = s.active();
                if (ep == nullptr || ep->word != word) throw fail(e, "no open episode for '" + word + "'");
                if (std::find(ep->pending_candidates.begin(), ep->pending_candidates.end(), entity) ==
                    ep->pending_candidates.end()) {
                    throw fail(e, "'" + entity + "' was not offered");
                }
                ep->posterior = posterior_update(ep->posterior, entity);
                ep->observations.push_back(entity);
                break;
            }
            case EventKind::bot_commit: {
                auto word = payload_string(e, "word");
                auto node = payload_string(e, "node");
                auto* ep = s.active();
                if (ep == nullptr || ep->word != word) throw fail(e, "no open episode for '" + word + "'");
                auto map = map_hypothesis(ep->posterior);
                if (map.node != node) throw fail(e, "logged node '" + node + "' disagrees with posterior");
                if (apply_commits) {
                    s.lexicon_->commit(word, LexiconEntry{node, map.probability,
                                                          ep->observations.size(), e.ts});
                }
                ep->status = EpisodeStatus::committed;
                ep->pending_candidates.clear();
                // A following bot_elicitation restores whatever is still queued.
                s.queue_.clear();
                break;
            }
        }
    }
    return s;
}

}  // namespace lexlearn
