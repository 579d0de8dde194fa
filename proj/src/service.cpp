#include "lexlearn/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "lexlearn/errors.hpp"
#include "lexlearn/event_log.hpp"
#include "lexlearn/storage.hpp"

namespace lexlearn {

namespace {

ServiceResponse error(int status, std::string code, std::string detail) {
    return {status, {{"error", std::move(code)}, {"detail", std::move(detail)}}};
}

std::optional<nlohmann::json> parse_body(std::string_view body) {
    try {
        auto j = nlohmann::json::parse(body);
        if (j.is_object()) {
            return j;
        }
    } catch (const nlohmann::json::parse_error&) {
    }
    return std::nullopt;
}

bool valid_session_id(std::string_view id) {
    return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    });
}

constexpr const char* kLogSuffix = ".jsonl";

}  // namespace

ServiceConfig ServiceConfig::from_json(const nlohmann::json& doc,
                                       const std::filesystem::path& base) {
    static const std::vector<std::string> known{"host",     "port",      "ontology",
                                                "lexicon",  "log_dir",   "k",
                                                "strategy", "threshold", "seed",
                                                "max_body_bytes", "cors_origin"};
    if (!doc.is_object()) {
        throw std::invalid_argument("service config must be a JSON object");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw std::invalid_argument("unknown config key '" + it.key() + "'");
        }
    }
    auto resolve = [&base](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base.empty() ? base / path : path;
    };

    ServiceConfig cfg;
    try {
        for (const char* key : {"ontology", "lexicon", "log_dir"}) {
            if (!doc.contains(key)) {
                throw std::invalid_argument(std::string("config requires '") + key + "'");
            }
        }
        cfg.ontology = resolve(doc["ontology"].get<std::string>());
        cfg.lexicon = resolve(doc["lexicon"].get<std::string>());
        cfg.log_dir = resolve(doc["log_dir"].get<std::string>());
        cfg.host = doc.value("host", cfg.host);
        cfg.port = doc.value("port", cfg.port);
        cfg.elicitation.k = doc.value("k", cfg.elicitation.k);
        if (doc.contains("strategy")) {
            cfg.elicitation.strategy = parse_strategy(doc["strategy"].get<std::string>());
        }
        cfg.elicitation.commit_threshold = doc.value("threshold", cfg.elicitation.commit_threshold);
        cfg.elicitation.seed = doc.value("seed", cfg.elicitation.seed);
        cfg.max_body_bytes = doc.value("max_body_bytes", cfg.max_body_bytes);
        cfg.cors_origin = doc.value("cors_origin", cfg.cors_origin);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
    }
    if (cfg.port < 0 || cfg.port > 65535) {
        throw std::invalid_argument("port must lie in 1-65535 (or 0 for any free port)");
    }
    return cfg;
}

ServiceConfig ServiceConfig::load_file(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(doc, path.parent_path());
}

ChatService::ChatService(ServiceConfig config)
    : config_(std::move(config)),
      id_state_(std::random_device{}() ^
                static_cast<std::uint64_t>(
                    std::chrono::steady_clock::now().time_since_epoch().count())) {
    ontology_ = std::make_shared<const Ontology>(Ontology::load_file(config_.ontology));
    config_.elicitation.validate(*ontology_);
    std::error_code ec;
    std::filesystem::create_directories(config_.log_dir, ec);
    if (!std::filesystem::is_directory(config_.log_dir)) {
        throw StorageUnavailable("log directory '" + config_.log_dir.string() + "' is unusable");
    }
    lexicon_ = std::make_shared<Lexicon>(config_.lexicon);
    restore_sessions();
}

SessionOptions ChatService::session_options() const {
    SessionOptions opts;
    opts.elicitation = config_.elicitation;
    return opts;
}

void ChatService::restore_sessions() {
    for (const auto& entry : std::filesystem::directory_iterator(config_.log_dir)) {
        const auto& path = entry.path();
        if (!entry.is_regular_file() || path.extension() != kLogSuffix) {
            continue;
        }
        auto id = path.stem().string();
        if (!valid_session_id(id)) {
            continue;
        }
        // Commits in old logs are already in the lexicon file; re-applying
        // them could overwrite newer entries.
        auto slot = std::make_shared<Slot>();
        slot->session.emplace(Session::replay(EventLog::read(path), ontology_, lexicon_,
                                              session_options(), path, /*apply_commits=*/false));
        sessions_.emplace(id, std::move(slot));
    }
}

std::string ChatService::fresh_id() {
    std::lock_guard lock(id_mu_);
    // splitmix64 over a randomly seeded counter
    id_state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = id_state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
    return buf;
}

std::shared_ptr<ChatService::Slot> ChatService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t ChatService::session_count() const {
    std::shared_lock lock(sessions_mu_);
    return sessions_.size();
}

ServiceResponse ChatService::create_session() {
    std::string id;
    do {
        id = fresh_id();
    } while (find(id));
    try {
        auto slot = std::make_shared<Slot>();
        slot->session.emplace(ontology_, lexicon_, session_options(),
                              EventLog(config_.log_dir / (id + kLogSuffix)));
        std::unique_lock lock(sessions_mu_);
        sessions_.emplace(id, std::move(slot));
    } catch (const StorageUnavailable& e) {
        return error(503, e.code(), e.what());
    }
    return {201, {{"session_id", id}}};
}

ServiceResponse ChatService::post_message(const std::string& session_id, std::string_view body) {
    auto slot = find(session_id);
    if (!slot) {
        return error(404, "unknown_session", "no session '" + session_id + "'");
    }
    if (body.size() > config_.max_body_bytes) {
        return error(400, "body_too_large",
                     "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
    }
    auto doc = parse_body(body);
    if (!doc || !doc->contains("text") || !(*doc)["text"].is_string()) {
        return error(400, "bad_request", "expected {\"text\": string}");
    }
    auto text = (*doc)["text"].get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        return error(400, "empty_text", "message text is empty");
    }

    std::lock_guard lock(slot->mu);
    try {
        return {200, to_json(slot->session->handle_message(text))};
    } catch (const StorageUnavailable& e) {
        return error(503, e.code(), e.what());
    } catch (const SessionClosed& e) {
        return error(409, e.code(), e.what());
    }
}

ServiceResponse ChatService::post_selection(const std::string& session_id, std::string_view body) {
    auto slot = find(session_id);
    if (!slot) {
        return error(404, "unknown_session", "no session '" + session_id + "'");
    }
    if (body.size() > config_.max_body_bytes) {
        return error(400, "body_too_large",
                     "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
    }
    auto doc = parse_body(body);
    if (!doc || !doc->contains("word") || !(*doc)["word"].is_string() ||
        !doc->contains("entity") || !(*doc)["entity"].is_string()) {
        return error(400, "bad_request", "expected {\"word\": string, \"entity\": string}");
    }

    std::lock_guard lock(slot->mu);
    try {
        auto result = slot->session->handle_selection((*doc)["word"].get<std::string>(),
                                                      (*doc)["entity"].get<std::string>());
        return {200, result.to_json()};
    } catch (const NoActiveEpisode& e) {
        return error(409, e.code(), e.what());
    } catch (const CandidateNotOffered& e) {
        return error(409, e.code(), e.what());
    } catch (const SessionClosed& e) {
        return error(409, e.code(), e.what());
    } catch (const UnknownEntity& e) {
        return error(400, e.code(), e.what());
    } catch (const StorageUnavailable& e) {
        return error(503, e.code(), e.what());
    }
}

ServiceResponse ChatService::get_posterior(const std::string& session_id,
                                           const std::optional<std::string>& word) {
    auto slot = find(session_id);
    if (!slot) {
        return error(404, "unknown_session", "no session '" + session_id + "'");
    }
    if (!word || word->empty()) {
        return error(400, "bad_request", "query parameter 'word' is required");
    }
    std::string w = *word;
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::lock_guard lock(slot->mu);
    auto p = slot->session->posterior_for(w);
    if (!p) {
        return error(404, "unknown_word", "session has no belief about '" + w + "'");
    }
    return {200, p->to_json()};
}

ServiceResponse ChatService::get_lexicon() const { return {200, lexicon_->to_json()}; }

ServiceResponse ChatService::get_ontology() const { return {200, ontology_->to_json()}; }

}  // namespace lexlearn
