#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lexlearn {

using Vocabulary = std::set<std::string, std::less<>>;

/// Lowercase, strip ASCII punctuation, split on whitespace. Empty pieces dropped.
std::vector<std::string> tokenize(std::string_view text);

bool is_numeric_token(std::string_view token);

/// Token with a trailing "s" removed when it is at least four characters
/// long and ends in "s"; otherwise the token itself.
std::string singular_form(std::string_view token);

/// Minimal English stopword list.
const Vocabulary& default_stopwords();

/// Words in `text` that the vocabulary does not cover, in order of first
/// appearance, deduplicated. Stopwords and numbers are skipped; a plural
/// counts as known when either form is known, and otherwise is reported
/// in its singular form.
std::vector<std::string> detect_unknown_terms(std::string_view text, const Vocabulary& vocab);

}  // namespace lexlearn
