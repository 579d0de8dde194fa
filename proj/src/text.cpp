#include "lexlearn/text.hpp"

#include <algorithm>
#include <cctype>

namespace lexlearn {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (std::ispunct(c)) {
            continue;
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    flush();
    return out;
}

bool is_numeric_token(std::string_view token) {
    return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) != 0;
    });
}

std::string singular_form(std::string_view token) {
    if (token.size() >= 4 && token.back() == 's') {
        return std::string(token.substr(0, token.size() - 1));
    }
    return std::string(token);
}

const Vocabulary& default_stopwords() {
    static const Vocabulary words{
        "a", "about", "an", "and", "any", "are", "as", "at", "be", "but", "by", "can", "could",
        "did", "do", "does", "for", "from", "had", "has", "have", "how", "i", "if", "in", "is",
        "it", "its", "me", "my", "no", "not", "of", "on", "or", "our", "so", "than", "that",
        "the", "their", "them", "there", "these", "they", "this", "those", "to", "was", "we",
        "were", "what", "when", "where", "which", "who", "why", "will", "with", "would", "you",
        "your",
    };
    return words;
}

std::vector<std::string> detect_unknown_terms(std::string_view text, const Vocabulary& vocab) {
    std::vector<std::string> unknown;
    for (const auto& token : tokenize(text)) {
        if (is_numeric_token(token) || vocab.contains(token)) {
            continue;
        }
        auto base = singular_form(token);
        if (vocab.contains(base)) {
            continue;
        }
        if (std::find(unknown.begin(), unknown.end(), base) == unknown.end()) {
            unknown.push_back(std::move(base));
        }
    }
    return unknown;
}

}  // namespace lexlearn
