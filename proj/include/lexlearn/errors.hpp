#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lexlearn {

// Base for every error raised by the library. code() is a stable snake_case
// identifier that the HTTP layer forwards verbatim in {"error": ...}.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse_error", what) {}
};

enum class ValidationIssue {
    empty_id,
    duplicate_id,
    dangling_reference,
    cycle,
    root_count,
    no_entities,
};

class ValidationError : public Error {
public:
    ValidationError(ValidationIssue issue, std::string offending_id, const std::string& what)
        : Error("validation_error", what), issue_(issue), offending_id_(std::move(offending_id)) {}

    ValidationIssue issue() const noexcept { return issue_; }
    const std::string& offending_id() const noexcept { return offending_id_; }

private:
    ValidationIssue issue_;
    std::string offending_id_;
};

class UnknownNode : public Error {
public:
    explicit UnknownNode(const std::string& id)
        : Error("unknown_node", "unknown node id '" + id + "'"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class UnknownEntity : public Error {
public:
    explicit UnknownEntity(const std::string& id)
        : Error("unknown_entity", "unknown entity id '" + id + "'"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class NoConsistentHypothesis : public Error {
public:
    NoConsistentHypothesis()
        : Error("no_consistent_hypothesis", "no hypothesis is consistent with the observations") {}
};

class NoActiveEpisode : public Error {
public:
    explicit NoActiveEpisode(const std::string& word)
        : Error("no_active_episode", "no learning episode awaiting selection for '" + word + "'") {}
};

class CandidateNotOffered : public Error {
public:
    CandidateNotOffered(const std::string& word, const std::string& entity)
        : Error("candidate_not_offered",
                "'" + entity + "' was not among the candidates offered for '" + word + "'") {}
};

class SessionClosed : public Error {
public:
    SessionClosed() : Error("session_closed", "session is closed") {}
};

class CorruptLog : public Error {
public:
    explicit CorruptLog(const std::string& what) : Error("corrupt_log", what) {}
};

class StorageUnavailable : public Error {
public:
    explicit StorageUnavailable(const std::string& what) : Error("storage_unavailable", what) {}
};

}  // namespace lexlearn
