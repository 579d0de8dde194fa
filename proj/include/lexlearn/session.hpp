#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexlearn/elicitation.hpp"
#include "lexlearn/event_log.hpp"
#include "lexlearn/inference.hpp"
#include "lexlearn/lexicon.hpp"
#include "lexlearn/ontology.hpp"
#include "lexlearn/text.hpp"

namespace lexlearn {

struct Candidate {
    std::string id;
    std::string label;
};

struct Elicitation {
    std::string word;
    std::vector<Candidate> candidates;
};

/// A term in the user's message resolved to a graph node, either through a
/// learned lexicon entry or by matching a node label.
struct Binding {
    std::string term;
    std::string node;
    std::string source;  // "lexicon" | "label"
};

/// Placeholder answer: the bindings the bot resolved. No HR question
/// answering happens here.
struct Answer {
    std::vector<Binding> bindings;
};

using BotReply = std::variant<Elicitation, Answer>;

nlohmann::json to_json(const Elicitation& e);
nlohmann::json to_json(const Answer& a);
nlohmann::json to_json(const BotReply& reply);

enum class EpisodeStatus { awaiting_selection, committed, abandoned };

std::string_view to_string(EpisodeStatus s);

struct LearningEpisode {
    std::string word;
    std::vector<std::string> observations;
    Posterior posterior;
    EpisodeStatus status = EpisodeStatus::awaiting_selection;
    std::vector<std::string> pending_candidates;
};

struct SelectionResult {
    Posterior posterior;
    CommitDecision decision;
    /// What the user should be asked next: fresh candidates for the same word
    /// while learning, or the next queued word after a commit.
    std::optional<Elicitation> next;

    /// {"posterior", "status": "learning"|"committed", "committed_node"?,
    ///  "confidence"?, "next"?}
    nlohmann::json to_json() const;
};

struct SessionOptions {
    ElicitationConfig elicitation;
    Vocabulary stopwords = default_stopwords();
    std::function<std::string()> clock;  // defaults to utc_timestamp
};

/// Conversational state for one user: detects unknown words, runs one
/// learning episode at a time (further unknown words wait in a FIFO queue),
/// commits learned words to the shared lexicon and records every step in an
/// event log that replay() can rebuild the session from.
///
/// Not thread-safe; callers serialize access per session.
class Session {
public:
    Session(std::shared_ptr<const Ontology> ontology, std::shared_ptr<Lexicon> lexicon,
            SessionOptions options, EventLog log = {});

    BotReply handle_message(std::string_view text);

    /// Throws NoActiveEpisode, UnknownEntity, CandidateNotOffered, SessionClosed.
    SelectionResult handle_selection(std::string_view word, std::string_view entity);

    /// Abandons any open episode; later calls throw SessionClosed. Closing is
    /// not recorded in the event log.
    void close();
    bool closed() const noexcept { return closed_; }

    const std::vector<LearningEpisode>& episodes() const noexcept { return episodes_; }
    const LearningEpisode* active_episode() const;
    const std::deque<std::string>& queue() const noexcept { return queue_; }

    /// Latest belief for `word`: its episode's posterior, the prior if the word
    /// is queued, nullopt otherwise.
    std::optional<Posterior> posterior_for(std::string_view word) const;

    const EventLog& log() const noexcept { return log_; }
    const Ontology& ontology() const noexcept { return *ontology_; }

    /// Structural view of episodes and queue, used for replay comparisons.
    nlohmann::json state_json() const;

    /// Rebuild a session from its event log. With apply_commits, commits found
    /// in the log are written to `lexicon`; otherwise the lexicon is assumed to
    /// hold them already. Throws CorruptLog.
    static Session replay(const std::vector<SessionEvent>& events,
                          std::shared_ptr<const Ontology> ontology,
                          std::shared_ptr<Lexicon> lexicon, SessionOptions options,
                          std::optional<std::filesystem::path> log_file = std::nullopt,
                          bool apply_commits = true);

private:
    LearningEpisode* active();
    Vocabulary vocabulary() const;
    std::vector<Binding> resolve_bindings(std::string_view text) const;
    Elicitation elicitation_for(const LearningEpisode& ep) const;
    LearningEpisode& open_episode(const std::string& word);
    std::optional<Elicitation> open_next_queued();
    void record(EventKind kind, nlohmann::json payload, std::string ts = {});
    nlohmann::json elicitation_payload(const LearningEpisode& ep) const;

    std::shared_ptr<const Ontology> ontology_;
    std::shared_ptr<Lexicon> lexicon_;
    SessionOptions options_;
    EventLog log_;
    Vocabulary label_tokens_;
    std::vector<std::pair<std::string, std::string>> label_index_;  // normalized label -> node
    std::vector<LearningEpisode> episodes_;
    std::deque<std::string> queue_;
    bool closed_ = false;
};

}  // namespace lexlearn
