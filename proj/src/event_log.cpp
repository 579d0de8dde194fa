#include "lexlearn/event_log.hpp"

#include <sstream>

#include "lexlearn/errors.hpp"
#include "lexlearn/storage.hpp"

namespace lexlearn {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::user_message:
            return "user_message";
        case EventKind::bot_elicitation:
            return "bot_elicitation";
        case EventKind::user_selection:
            return "user_selection";
        case EventKind::bot_commit:
            return "bot_commit";
        case EventKind::bot_answer:
            return "bot_answer";
    }
    return "user_message";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (auto k : {EventKind::user_message, EventKind::bot_elicitation, EventKind::user_selection,
                   EventKind::bot_commit, EventKind::bot_answer}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

nlohmann::json SessionEvent::to_json() const {
    return {{"seq", seq}, {"ts", ts}, {"kind", to_string(kind)}, {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("seq") || !j.contains("ts") || !j.contains("kind") ||
        !j.contains("payload")) {
        throw CorruptLog("event record must have seq, ts, kind and payload");
    }
    const auto& seq = j["seq"];
    if (!seq.is_number_unsigned() || !j["ts"].is_string() || !j["kind"].is_string() ||
        !j["payload"].is_object()) {
        throw CorruptLog("event record has fields of the wrong type");
    }
    auto kind = parse_event_kind(j["kind"].get<std::string>());
    if (!kind) {
        throw CorruptLog("unknown event kind '" + j["kind"].get<std::string>() + "'");
    }
    return SessionEvent{seq.get<std::uint64_t>(), j["ts"].get<std::string>(), *kind, j["payload"]};
}

EventLog::EventLog(std::filesystem::path file) : file_(std::move(file)) {
    write_file_atomic(*file_, "");
}

EventLog::EventLog(std::filesystem::path file, std::vector<SessionEvent> events)
    : file_(std::move(file)), events_(std::move(events)) {}

void EventLog::append(SessionEvent event) {
    events_.push_back(std::move(event));
    if (file_) {
        try {
            write_file_atomic(*file_, serialize());
        } catch (...) {
            events_.pop_back();
            throw;
        }
    }
}

std::string EventLog::serialize() const {
    std::string out;
    for (const auto& e : events_) {
        out += e.to_json().dump();
        out += '\n';
    }
    return out;
}

std::vector<SessionEvent> EventLog::parse(std::string_view text) {
    std::vector<SessionEvent> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw CorruptLog("line " + std::to_string(lineno) + " is not valid JSON");
        }
        out.push_back(SessionEvent::from_json(j));
    }
    return out;
}

std::vector<SessionEvent> EventLog::read(const std::filesystem::path& file) {
    return parse(read_file(file));
}

}  // namespace lexlearn
