#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexlearn {

enum class EventKind { user_message, bot_elicitation, user_selection, bot_commit, bot_answer };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct SessionEvent {
    std::uint64_t seq = 0;
    std::string ts;
    EventKind kind = EventKind::user_message;
    nlohmann::json payload;

    bool operator==(const SessionEvent&) const = default;

    nlohmann::json to_json() const;
    /// Throws CorruptLog on a malformed record.
    static SessionEvent from_json(const nlohmann::json& j);
};

/// Append-only event list for one session, optionally mirrored to a JSON
/// Lines file that is replaced atomically on every append.
class EventLog {
public:
    EventLog() = default;
    /// Creates (or truncates) `file`. Throws StorageUnavailable.
    explicit EventLog(std::filesystem::path file);

    /// Adopt already-persisted events; the file is left as is.
    EventLog(std::filesystem::path file, std::vector<SessionEvent> events);

    const std::vector<SessionEvent>& events() const noexcept { return events_; }
    std::uint64_t next_seq() const noexcept { return events_.size() + 1; }

    void append(SessionEvent event);

    std::string serialize() const;

    /// Parse a JSON Lines log. Throws CorruptLog.
    static std::vector<SessionEvent> parse(std::string_view text);
    static std::vector<SessionEvent> read(const std::filesystem::path& file);

private:
    std::optional<std::filesystem::path> file_;
    std::vector<SessionEvent> events_;
};

}  // namespace lexlearn
