#include "podcorpus/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace podcorpus::text {

namespace {

// Version tag bumps whenever the list below changes.
constexpr std::string_view kStopwordVersion = "en-2020.1";

// Sorted; normalized form (no apostrophes).
constexpr std::array<std::string_view, 212> kStopwords = {
    "a", "about", "above", "after", "again", "against",
    "ah", "all", "also", "am", "an", "and",
    "any", "are", "arent", "as", "at", "be",
    "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "cant", "could",
    "couldnt", "did", "didnt", "do", "does", "doesnt",
    "doing", "dont", "down", "during", "each", "even",
    "few", "for", "from", "further", "get", "gets",
    "getting", "go", "goes", "going", "gonna", "got",
    "gotta", "had", "hadnt", "has", "hasnt", "have",
    "havent", "having", "he", "hed", "hell", "her",
    "here", "heres", "hers", "herself", "hes", "hey",
    "him", "himself", "his", "how", "hows", "i",
    "id", "if", "ill", "im", "in", "into",
    "is", "isnt", "it", "its", "itself", "ive",
    "just", "kind", "know", "lets", "like", "lot",
    "me", "mean", "mhm", "more", "most", "much",
    "must", "mustnt", "my", "myself", "no", "nor",
    "not", "now", "of", "off", "oh", "ok",
    "okay", "on", "once", "one", "only", "or",
    "other", "ought", "our", "ours", "ourselves", "out",
    "over", "own", "really", "right", "said", "same",
    "say", "shant", "she", "shed", "shell", "shes",
    "should", "shouldnt", "so", "some", "such", "than",
    "that", "thats", "the", "their", "theirs", "them",
    "themselves", "then", "there", "theres", "these", "they",
    "theyd", "theyll", "theyre", "theyve", "thing", "things",
    "think", "this", "those", "through", "to", "too",
    "uh", "um", "under", "until", "up", "very",
    "was", "wasnt", "we", "wed", "well", "were",
    "werent", "weve", "what", "whats", "when", "whens",
    "where", "wheres", "which", "while", "who", "whom",
    "whos", "why", "whys", "will", "with", "wont",
    "would", "wouldnt", "yeah", "yes", "you", "youd",
    "youll", "your", "youre", "yours", "yourself", "yourselves",
    "youve", "yup",
};
static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool is_punct(char c) noexcept {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

std::string fold_token(std::string_view token) {
  while (!token.empty() && is_punct(token.front())) token.remove_prefix(1);
  while (!token.empty() && is_punct(token.back())) token.remove_suffix(1);
  return to_lower(token);
}

std::string normalize_word(std::string_view token) {
  std::string lowered = to_lower(token);
  std::string_view view = lowered;
  while (!view.empty() && is_punct(view.back())) view.remove_suffix(1);
  for (std::string_view suffix : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
    if (view.size() > suffix.size() && view.ends_with(suffix)) {
      view.remove_suffix(suffix.size());
      break;
    }
  }
  std::string out;
  out.reserve(view.size());
  for (char c : view) {
    if (!is_punct(c)) out.push_back(c);
  }
  return out;
}

std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(text)) {
    std::string w = normalize_word(raw);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool is_stopword(std::string_view normalized) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), normalized);
}

std::string_view stopword_list_version() noexcept { return kStopwordVersion; }

}  // namespace podcorpus::text
