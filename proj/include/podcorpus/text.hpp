#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace podcorpus::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// ASCII punctuation only; UTF-8 continuation bytes are never stripped.
bool is_punct(char c) noexcept;

// Lowercase and strip leading/trailing punctuation. Used for 4-gram keys
// and name matching.
std::string fold_token(std::string_view token);

// Lowercase, drop a trailing possessive, strip every ASCII punctuation
// character. Used for topic modeling and phrase mentions.
std::string normalize_word(std::string_view token);

// normalize_word over a whitespace-tokenized text, dropping empty results.
std::vector<std::string> normalize_words(std::string_view text);

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

// Fixed shipped English stopword list.
bool is_stopword(std::string_view normalized);
std::string_view stopword_list_version() noexcept;

}  // namespace podcorpus::text
