#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexlearn {

struct LexiconEntry {
    std::string node;
    double confidence = 0.0;
    std::size_t n = 0;  // observations behind the commit
    std::string committed_at;

    bool operator==(const LexiconEntry&) const = default;
};

/// Learned word -> node mappings shared by every session. Many readers, one
/// writer at a time. When backed by a file, every commit rewrites the file
/// atomically.
class Lexicon {
public:
    Lexicon() = default;
    /// Loads `file` if it exists, otherwise creates it empty. Throws
    /// StorageUnavailable or ParseError.
    explicit Lexicon(std::filesystem::path file);

    Lexicon(const Lexicon&) = delete;
    Lexicon& operator=(const Lexicon&) = delete;

    std::optional<LexiconEntry> lookup(std::string_view word) const;
    bool contains(std::string_view word) const;
    std::vector<std::string> words() const;
    std::map<std::string, LexiconEntry, std::less<>> snapshot() const;

    void commit(const std::string& word, LexiconEntry entry);

    /// {"word": {"node","confidence","n","committed_at"}, ...}
    nlohmann::json to_json() const;
    static std::map<std::string, LexiconEntry, std::less<>> entries_from_json(
        const nlohmann::json& doc);

private:
    mutable std::shared_mutex mu_;
    std::map<std::string, LexiconEntry, std::less<>> entries_;
    std::optional<std::filesystem::path> file_;
};

}  // namespace lexlearn
