#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lexlearn/elicitation.hpp"
#include "lexlearn/lexicon.hpp"
#include "lexlearn/ontology.hpp"
#include "lexlearn/session.hpp"

namespace lexlearn {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path ontology;
    std::filesystem::path lexicon;
    std::filesystem::path log_dir;
    ElicitationConfig elicitation;
    std::size_t max_body_bytes = 64 * 1024;
    std::string cors_origin;  // empty disables CORS headers

    /// Keys: host, port, ontology, lexicon, log_dir, k, strategy, threshold,
    /// seed, max_body_bytes, cors_origin. Relative paths resolve against
    /// `base`. Throws std::invalid_argument.
    static ServiceConfig from_json(const nlohmann::json& doc,
                                   const std::filesystem::path& base = {});
    static ServiceConfig load_file(const std::filesystem::path& path);
};

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

/// Transport-independent request handling for the chat API. Sessions are kept
/// in memory and mirrored to one JSON Lines event log per session under
/// log_dir; constructing a service replays any logs already there.
///
/// Thread-safe. Requests to one session are serialized on that session's
/// mutex; different sessions run concurrently.
class ChatService {
public:
    explicit ChatService(ServiceConfig config);

    ServiceResponse create_session();
    ServiceResponse post_message(const std::string& session_id, std::string_view body);
    ServiceResponse post_selection(const std::string& session_id, std::string_view body);
    ServiceResponse get_posterior(const std::string& session_id,
                                  const std::optional<std::string>& word);
    ServiceResponse get_lexicon() const;
    ServiceResponse get_ontology() const;

    const ServiceConfig& config() const noexcept { return config_; }
    std::size_t session_count() const;

private:
    struct Slot {
        std::mutex mu;
        std::optional<Session> session;
    };

    std::shared_ptr<Slot> find(const std::string& id) const;
    std::string fresh_id();
    SessionOptions session_options() const;
    void restore_sessions();

    ServiceConfig config_;
    std::shared_ptr<const Ontology> ontology_;
    std::shared_ptr<Lexicon> lexicon_;
    mutable std::shared_mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
    std::mutex id_mu_;
    std::uint64_t id_state_;
};

/// cpp-httplib front end for ChatService.
///
///   POST /api/sessions
///   POST /api/sessions/{id}/messages     {"text"}
///   POST /api/sessions/{id}/selections   {"word","entity"}
///   GET  /api/sessions/{id}/posterior?word=w
///   GET  /api/lexicon
///   GET  /api/ontology
class HttpServer {
public:
    explicit HttpServer(ChatService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Bind to config host/port (port 0: any free port). Returns the bound
    /// port or throws std::runtime_error.
    int bind();
    /// Serve until stop(); blocks.
    void listen();
    /// bind() + listen() on a background thread; returns the bound port once
    /// the server accepts connections.
    int start_background();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lexlearn
