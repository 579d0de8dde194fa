#include "lexlearn/lexicon.hpp"

#include <mutex>

#include "lexlearn/errors.hpp"
#include "lexlearn/storage.hpp"

namespace lexlearn {

namespace {

nlohmann::json entries_to_json(const std::map<std::string, LexiconEntry, std::less<>>& entries) {
    auto doc = nlohmann::json::object();
    for (const auto& [word, e] : entries) {
        doc[word] = {{"node", e.node},
                     {"confidence", e.confidence},
                     {"n", e.n},
                     {"committed_at", e.committed_at}};
    }
    return doc;
}

}  // namespace

Lexicon::Lexicon(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(*file_)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(*file_));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("lexicon file '" + file_->string() + "': " + e.what());
        }
        entries_ = entries_from_json(doc);
    } else {
        write_file_atomic(*file_, "{}\n");
    }
}

std::optional<LexiconEntry> Lexicon::lookup(std::string_view word) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(word);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool Lexicon::contains(std::string_view word) const {
    std::shared_lock lock(mu_);
    return entries_.contains(word);
}

std::vector<std::string> Lexicon::words() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [w, _] : entries_) {
        out.push_back(w);
    }
    return out;
}

std::map<std::string, LexiconEntry, std::less<>> Lexicon::snapshot() const {
    std::shared_lock lock(mu_);
    return entries_;
}

void Lexicon::commit(const std::string& word, LexiconEntry entry) {
    std::unique_lock lock(mu_);
    auto next = entries_;
    next[word] = std::move(entry);
    if (file_) {
        // Persist first so a failed write leaves memory and disk in agreement.
        write_file_atomic(*file_, entries_to_json(next).dump(2) + "\n");
    }
    entries_ = std::move(next);
}

nlohmann::json Lexicon::to_json() const {
    std::shared_lock lock(mu_);
    return entries_to_json(entries_);
}

std::map<std::string, LexiconEntry, std::less<>> Lexicon::entries_from_json(
    const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw ParseError("lexicon: expected a JSON object");
    }
    std::map<std::string, LexiconEntry, std::less<>> out;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const auto& v = it.value();
            out.emplace(it.key(), LexiconEntry{v.at("node").get<std::string>(),
                                               v.at("confidence").get<double>(),
                                               v.at("n").get<std::size_t>(),
                                               v.at("committed_at").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("lexicon entry: ") + e.what());
    }
    return out;
}

}  // namespace lexlearn
