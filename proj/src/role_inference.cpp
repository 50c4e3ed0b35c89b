#include "podcorpus/role_inference.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

namespace podcorpus::roles {

namespace {

// Titles and honorifics preceding a name; they break a run without joining it.
constexpr std::array<std::string_view, 30> kTitles = {
    "captain", "coach",    "dame",      "doctor",    "dr",        "father",
    "general", "gov",      "governor",  "judge",     "miss",      "mayor",
    "mr",      "mrs",      "ms",        "mx",        "officer",   "pastor",
    "president", "prof",   "professor", "rabbi",     "rep",       "representative",
    "rev",     "reverend", "sen",       "senator",   "sir",       "sister",
};

// Capitalized words that are not person-name parts: sentence starters,
// calendar words, places, brands and other common proper nouns.
const std::set<std::string, std::less<>>& excluded_words() {
  static const std::set<std::string, std::less<>> words = {
      // pronouns, function words and greetings
      "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "back",
      "be", "because", "before", "but", "by", "can", "check", "do", "don't", "each", "for",
      "from", "good", "great", "he", "hello", "her", "here", "hey", "hi", "his", "how", "i",
      "i'd", "i'll", "i'm", "i've", "if", "in", "is", "it", "it's", "its", "just", "let's",
      "like", "my", "no", "not", "now", "of", "oh", "ok", "okay", "on", "one", "or", "our",
      "please", "really", "she", "so", "thank", "thanks", "that", "that's", "the", "their",
      "then", "there", "these", "they", "this", "those", "to", "today", "tonight", "um",
      "uh", "us", "we", "we're", "welcome", "well", "what", "when", "where", "which", "who",
      "why", "with", "yeah", "yes", "you", "you're", "your",
      // show vocabulary
      "chapter", "episode", "intro", "live", "music", "news", "outro", "part", "podcast",
      "podcasts", "radio", "season", "series", "show", "special", "sponsor", "update",
      // calendar
      "april", "august", "december", "february", "friday", "january", "july", "june",
      "march", "may", "monday", "november", "october", "saturday", "september", "sunday",
      "thursday", "tuesday", "wednesday", "christmas", "easter",
      // places
      "africa", "america", "american", "angeles", "asia", "atlanta", "australia", "avenue",
      "boston", "california", "canada", "chicago", "china", "city", "county", "dallas",
      "east", "england", "europe", "florida", "france", "francisco", "germany", "houston",
      "india", "island", "kingdom", "las", "london", "los", "mexico", "minneapolis",
      "minnesota", "new", "north", "ohio", "paris", "san", "south", "state", "states",
      "street", "texas", "united", "vegas", "washington", "west", "world", "york",
      // brands and platforms
      "amazon", "anchor", "apple", "audible", "discord", "facebook", "google", "instagram",
      "itunes", "microsoft", "netflix", "patreon", "soundcloud", "spotify", "stitcher",
      "tiktok", "twitter", "youtube", "zoom",
      // other frequent proper nouns
      "bible", "black", "christ", "church", "covid", "coronavirus", "god", "gospel", "holy",
      "jesus", "lives", "lord", "matter", "nfl", "nba", "saint", "spirit", "university",
      "white",
  };
  return words;
}

bool is_title(std::string_view lowered) {
  return std::find(kTitles.begin(), kTitles.end(), lowered) != kTitles.end();
}

bool is_name_word(std::string_view core) {
  if (core.size() < 2) return false;
  if (core[0] < 'A' || core[0] > 'Z') return false;
  bool lower_seen = false;
  for (char ch : core.substr(1)) {
    auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80) {
      lower_seen = true;
    } else if (std::islower(u)) {
      lower_seen = true;
    } else if (!std::isupper(u) && ch != '-' && ch != '\'') {
      return false;
    }
  }
  return lower_seen;
}

std::string strip_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

struct TokenShape {
  std::string core;
  std::size_t lead = 0;  // stripped leading punctuation bytes
  bool opens = false;    // leading punctuation starts a new run
  bool closes = false;   // trailing punctuation or possessive ends the run
};

TokenShape shape_of(std::string_view raw) {
  TokenShape s;
  std::string_view v = raw;
  while (!v.empty() && text::is_punct(v.front())) {
    v.remove_prefix(1);
    ++s.lead;
  }
  s.opens = s.lead > 0;
  while (!v.empty() && text::is_punct(v.back())) {
    v.remove_suffix(1);
    s.closes = true;
  }
  for (std::string_view suffix : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
    if (v.size() > suffix.size() && v.ends_with(suffix)) {
      v.remove_suffix(suffix.size());
      s.closes = true;
      break;
    }
  }
  s.core = std::string(v);
  return s;
}

std::vector<std::size_t> token_offsets(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> offsets(tokens.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    offsets[i] = pos;
    pos += tokens[i].size() + 1;
  }
  return offsets;
}

CandidateMention make_mention(const EpisodeRecord& episode, MentionSource source,
                              const std::vector<std::string>& tokens,
                              const std::vector<std::size_t>& offsets, std::size_t first,
                              std::string name, std::size_t lead) {
  CandidateMention m;
  m.episode_id = episode.episode.episode_id;
  m.name = std::move(name);
  m.source = source;
  m.token_index = first;
  m.char_offset = offsets[first] + lead;
  const std::size_t left_begin = first > kContextWords ? first - kContextWords : 0;
  m.left_context.assign(tokens.begin() + static_cast<std::ptrdiff_t>(left_begin),
                        tokens.begin() + static_cast<std::ptrdiff_t>(first));
  const std::size_t right_begin = std::min(first + 2, tokens.size());
  const std::size_t right_end = std::min(right_begin + kContextWords, tokens.size());
  m.right_context.assign(tokens.begin() + static_cast<std::ptrdiff_t>(right_begin),
                         tokens.begin() + static_cast<std::ptrdiff_t>(right_end));
  return m;
}

void scan_source(const EpisodeRecord& episode, MentionSource source,
                 std::vector<CandidateMention>& out) {
  const auto tokens = source_tokens(episode, source);
  const auto offsets = token_offsets(tokens);
  const std::size_t limit = source == MentionSource::Transcript
                                ? std::min(tokens.size(), kTranscriptWindowWords)
                                : tokens.size();
  struct Part {
    std::size_t index;
    std::string core;
    std::size_t lead;
  };
  std::vector<Part> run;
  auto flush = [&] {
    if (run.size() == 2) {
      out.push_back(make_mention(episode, source, tokens, offsets, run[0].index,
                                 run[0].core + " " + run[1].core, run[0].lead));
    }
    run.clear();
  };

  for (std::size_t i = 0; i < limit; ++i) {
    TokenShape s = shape_of(tokens[i]);
    if (s.opens) flush();
    std::string lowered = text::to_lower(s.core);
    const bool name_part = is_name_word(s.core) && !is_title(lowered) &&
                           !excluded_words().contains(lowered);
    if (!name_part) {
      flush();
      continue;
    }
    run.push_back(Part{i, std::move(s.core), s.lead});
    if (s.closes) flush();
  }
  flush();
}

std::vector<std::string> normalized(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& t : raw) {
    std::string w = text::normalize_word(t);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

// Pattern tokens run towards the name: for the left side they are matched
// from the end of the context backwards.
bool match_side(const std::vector<std::string>& pattern, std::size_t pi,
                const std::vector<std::string>& context, std::size_t ci, std::size_t max_gap) {
  if (pi == pattern.size()) return true;
  if (pattern[pi] == "*") {
    for (std::size_t skip = 0; skip <= max_gap && ci + skip <= context.size(); ++skip) {
      if (match_side(pattern, pi + 1, context, ci + skip, max_gap)) return true;
    }
    return false;
  }
  if (ci >= context.size() || context[ci] != pattern[pi]) return false;
  return match_side(pattern, pi + 1, context, ci + 1, max_gap);
}

std::string name_key(std::string_view episode_id, std::string_view name) {
  return std::string(episode_id) + '\x1f' + text::to_lower(name);
}

}  // namespace

std::string_view to_string(MentionSource source) noexcept {
  switch (source) {
    case MentionSource::Transcript: return "transcript";
    case MentionSource::EpisodeDescription: return "episode_description";
    case MentionSource::PodcastDescription: break;
  }
  return "podcast_description";
}

std::string CandidateMention::context() const {
  std::vector<std::string> all = left_context;
  all.push_back(name);
  all.insert(all.end(), right_context.begin(), right_context.end());
  return text::join(all, " ");
}

bool mention_precedes(const CandidateMention& a, const CandidateMention& b) noexcept {
  if (a.source != b.source) return a.source < b.source;
  return a.char_offset < b.char_offset;
}

std::vector<std::string> source_tokens(const EpisodeRecord& episode, MentionSource source) {
  switch (source) {
    case MentionSource::Transcript: {
      std::vector<std::string> tokens;
      for (const auto& w : episode.words) {
        for (auto& piece : text::split_whitespace(w.token)) {
          if (!text::fold_token(piece).empty()) tokens.push_back(std::move(piece));
        }
      }
      return tokens;
    }
    case MentionSource::EpisodeDescription:
      return text::split_whitespace(strip_html(episode.episode.description));
    case MentionSource::PodcastDescription:
      return text::split_whitespace(strip_html(episode.podcast.description));
  }
  return {};
}

std::vector<CandidateMention> extract_candidates(const EpisodeRecord& episode) {
  std::vector<CandidateMention> out;
  scan_source(episode, MentionSource::Transcript, out);
  scan_source(episode, MentionSource::EpisodeDescription, out);
  scan_source(episode, MentionSource::PodcastDescription, out);
  return out;
}

std::vector<CandidateMention> candidates_from_spans(const EpisodeRecord& episode,
                                                    std::span<const EntitySpan> spans) {
  std::vector<CandidateMention> out;
  for (const auto& span : spans) {
    if (span.token_end != span.token_begin + 2) continue;
    if (span.source == MentionSource::Transcript && span.token_end > kTranscriptWindowWords) {
      continue;
    }
    const auto tokens = source_tokens(episode, span.source);
    if (span.token_end > tokens.size()) continue;
    const auto offsets = token_offsets(tokens);
    TokenShape first = shape_of(tokens[span.token_begin]);
    TokenShape second = shape_of(tokens[span.token_begin + 1]);
    if (first.core.empty() || second.core.empty()) continue;
    out.push_back(make_mention(episode, span.source, tokens, offsets, span.token_begin,
                               first.core + " " + second.core, first.lead));
  }
  std::stable_sort(out.begin(), out.end(), mention_precedes);
  return out;
}

// ---------------------------------------------------------------------------
// Classifiers

CueConfig CueConfig::defaults() {
  using R = RoleLabel;
  CueConfig c;
  c.rules = {
      // direct host cues
      {"your host <name>", R::Host, true},
      {"im <name> and this is", R::Host, true},
      {"i am <name> and this is", R::Host, true},
      {"im <name> and welcome", R::Host, true},
      {"welcome to * im <name>", R::Host, true},
      {"welcome to * i am <name>", R::Host, true},
      {"welcome to * with <name>", R::Host, true},
      {"my name is <name>", R::Host, true},
      {"hosted by <name>", R::Host, true},
      {"im <name> your host", R::Host, true},
      {"<name> your host", R::Host, true},
      {"this is <name> and youre listening", R::Host, true},
      // direct guest cues
      {"my guest * <name>", R::Guest, true},
      {"my guests * <name>", R::Guest, true},
      {"our guest * <name>", R::Guest, true},
      {"special guest <name>", R::Guest, true},
      {"joining us * <name>", R::Guest, true},
      {"joining me * <name>", R::Guest, true},
      {"<name> joins us", R::Guest, true},
      {"<name> joins me", R::Guest, true},
      {"<name> is joining us", R::Guest, true},
      {"welcome to the show <name>", R::Guest, true},
      {"welcome <name> to the show", R::Guest, true},
      {"welcome <name> to the podcast", R::Guest, true},
      {"interview with <name>", R::Guest, true},
      {"interview * with <name>", R::Guest, true},
      {"joined by <name>", R::Guest, true},
      {"sat down with <name>", R::Guest, true},
      {"conversation with <name>", R::Guest, true},
      {"thanks for coming on <name>", R::Guest, true},
      {"<name> thanks for coming on", R::Guest, true},
      // weak cues
      {"im <name>", R::Host, false},
      {"host <name>", R::Host, false},
      {"<name> here", R::Host, false},
      {"guest <name>", R::Guest, false},
      {"talk with <name>", R::Guest, false},
      {"talking with <name>", R::Guest, false},
      {"talking to <name>", R::Guest, false},
      {"speak with <name>", R::Guest, false},
      {"featuring <name>", R::Guest, false},
  };
  return c;
}

CueConfig CueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cue config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("cue config: " + std::string(ex.what()), 0);
  }
  CueConfig c;
  c.direct_confidence = j.value("direct_confidence", c.direct_confidence);
  c.weak_confidence = j.value("weak_confidence", c.weak_confidence);
  c.default_confidence = j.value("default_confidence", c.default_confidence);
  c.max_gap = j.value("max_gap", c.max_gap);
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      c.rules.push_back(CueRule{r.at("pattern").get<std::string>(),
                                parse_role_label(r.at("label").get<std::string>()),
                                r.value("strength", std::string("direct")) != "weak"});
    }
  } else {
    c.rules = defaults().rules;
  }
  return c;
}

CuePhraseClassifier::CuePhraseClassifier(CueConfig config) : config_(std::move(config)) {
  for (double p : {config_.direct_confidence, config_.weak_confidence,
                   config_.default_confidence}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("cue config: confidences must lie in [0,1]");
    }
  }
  for (const auto& rule : config_.rules) {
    Compiled c;
    c.label = rule.label;
    c.confidence = rule.direct ? config_.direct_confidence : config_.weak_confidence;
    bool seen_name = false;
    for (const auto& raw : text::split_whitespace(rule.pattern)) {
      if (raw == "<name>") {
        if (seen_name) throw std::invalid_argument("cue pattern has two <name>: " + rule.pattern);
        seen_name = true;
        continue;
      }
      std::string tok = raw == "*" ? raw : text::normalize_word(raw);
      if (tok.empty()) continue;
      (seen_name ? c.right : c.left).push_back(std::move(tok));
    }
    if (!seen_name) throw std::invalid_argument("cue pattern lacks <name>: " + rule.pattern);
    std::reverse(c.left.begin(), c.left.end());
    compiled_.push_back(std::move(c));
  }
}

Prediction CuePhraseClassifier::classify(const CandidateMention& mention) const {
  auto left = normalized(mention.left_context);
  std::reverse(left.begin(), left.end());
  const auto right = normalized(mention.right_context);
  for (const auto& rule : compiled_) {
    if (match_side(rule.left, 0, left, 0, config_.max_gap) &&
        match_side(rule.right, 0, right, 0, config_.max_gap)) {
      return Prediction{rule.label, rule.confidence};
    }
  }
  return Prediction{RoleLabel::Neither, config_.default_confidence};
}

FileClassifier FileClassifier::load(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  const auto ep = table.column("episode_id");
  const auto name = table.column("name");
  const auto label = table.column("label");
  const auto conf = table.column("confidence");
  FileClassifier fc;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    double p = 0.0;
    auto field = text::trim(row[conf]);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), p);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !(p >= 0.0 && p <= 1.0)) {
      throw ParseError(path.string() + ": bad confidence on line " + std::to_string(r + 2),
                       r + 2);
    }
    RoleLabel l;
    try {
      l = parse_role_label(row[label]);
    } catch (const SchemaError&) {
      throw ParseError(path.string() + ": bad label on line " + std::to_string(r + 2), r + 2);
    }
    fc.add(row[ep], row[name], Prediction{l, p});
  }
  return fc;
}

void FileClassifier::add(std::string_view episode_id, std::string_view name, Prediction p) {
  auto [it, inserted] = table_.try_emplace(name_key(episode_id, name), p);
  if (!inserted && p.confidence > it->second.confidence) it->second = p;
}

Prediction FileClassifier::classify(const CandidateMention& mention) const {
  auto it = table_.find(name_key(mention.episode_id, mention.name));
  if (it == table_.end()) return Prediction{RoleLabel::Neither, 0.0};
  return it->second;
}

std::unique_ptr<RoleClassifier> make_classifier(std::string_view setting) {
  if (setting == "baseline") return std::make_unique<CuePhraseClassifier>();
  if (setting.starts_with("baseline:")) {
    return std::make_unique<CuePhraseClassifier>(CueConfig::load(setting.substr(9)));
  }
  if (setting.starts_with("file:")) {
    return std::make_unique<FileClassifier>(FileClassifier::load(setting.substr(5)));
  }
  throw std::invalid_argument("unknown classifier '" + std::string(setting) +
                              "' (expected baseline or file:<path>)");
}

// ---------------------------------------------------------------------------
// Aggregation

RoleAssignment aggregate_mentions(std::span<const ScoredMention> predictions) {
  if (predictions.empty()) throw std::invalid_argument("aggregate_mentions: no predictions");
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mention_precedes(predictions[a].mention, predictions[b].mention);
  });
  const ScoredMention* best = &predictions[order.front()];
  for (std::size_t i : order) {
    if (predictions[i].prediction.confidence > best->prediction.confidence) {
      best = &predictions[i];
    }
  }
  const ScoredMention& earliest = predictions[order.front()];
  return RoleAssignment{earliest.mention.name, best->prediction.label,
                        best->prediction.confidence, earliest.mention.episode_id};
}

std::vector<RoleAssignment> infer_roles(const EpisodeRecord& episode,
                                        const RoleClassifier& classifier,
                                        std::vector<ScoredMention>* mentions) {
  auto candidates = extract_candidates(episode);
  std::stable_sort(candidates.begin(), candidates.end(), mention_precedes);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<ScoredMention>> groups;
  for (auto& c : candidates) {
    Prediction p = classifier.classify(c);
    if (mentions != nullptr) mentions->push_back(ScoredMention{c, p});
    std::string key = text::to_lower(c.name);
    auto& group = groups[key];
    if (group.empty()) order.push_back(key);
    group.push_back(ScoredMention{std::move(c), p});
  }
  std::vector<RoleAssignment> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(aggregate_mentions(groups.at(key)));
  return out;
}

// ---------------------------------------------------------------------------
// Agreement

double krippendorff_alpha(const AnnotationMatrix& annotations) {
  std::map<std::string, std::size_t> label_index;
  for (const auto& item : annotations) {
    for (const auto& v : item) {
      if (v) label_index.try_emplace(*v, 0);
    }
  }
  std::size_t next = 0;
  for (auto& [label, idx] : label_index) idx = next++;
  const std::size_t L = label_index.size();

  std::vector<double> coincidence(L * L, 0.0);
  std::vector<std::size_t> values;
  for (const auto& item : annotations) {
    values.clear();
    for (const auto& v : item) {
      if (v) values.push_back(label_index.at(*v));
    }
    const std::size_t m = values.size();
    if (m < 2) continue;
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) coincidence[values[i] * L + values[j]] += weight;
      }
    }
  }

  std::vector<double> marginal(L, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < L; ++c) {
    for (std::size_t k = 0; k < L; ++k) marginal[c] += coincidence[c * L + k];
    n += marginal[c];
  }
  if (n < 2.0) {
    throw std::invalid_argument("krippendorff_alpha: no item carries two or more labels");
  }

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < L; ++c) {
    for (std::size_t k = 0; k < L; ++k) {
      if (c == k) continue;
      observed += coincidence[c * L + k];
      expected += marginal[c] * marginal[k];
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);
  if (expected == 0.0) {
    throw std::invalid_argument("krippendorff_alpha: zero expected disagreement");
  }
  return 1.0 - observed / expected;
}

// ---------------------------------------------------------------------------
// Summaries

RoleCountSummary role_count_summary(std::span<const EpisodeRoleSet> episodes) {
  RoleCountSummary summary;
  std::map<std::string, CategoryRoleSummary> by_category;
  summary.overall.category = "all";

  auto add = [](CategoryRoleSummary& s, const EpisodeRoleCounts& c) {
    ++s.episodes;
    ++s.host_histogram[c.host_count];
    ++s.guest_histogram[c.guest_count];
    if (c.host_count > 0) {
      ++s.episodes_with_host;
      s.host_mean = s.host_mean.value_or(0.0) + static_cast<double>(c.host_count);
    }
    s.guest_mean += static_cast<double>(c.guest_count);
  };

  for (const auto& ep : episodes) {
    std::set<std::string> hosts;
    std::set<std::string> guests;
    for (const auto& r : ep.roles) {
      if (r.label == RoleLabel::Host) hosts.insert(text::to_lower(r.name));
      if (r.label == RoleLabel::Guest) guests.insert(text::to_lower(r.name));
    }
    EpisodeRoleCounts counts{ep.episode_id, ep.category, hosts.size(), guests.size()};
    auto& cat = by_category[ep.category];
    cat.category = ep.category;
    add(cat, counts);
    add(summary.overall, counts);
    summary.episodes.push_back(std::move(counts));
  }

  auto finish = [](CategoryRoleSummary& s) {
    if (s.host_mean) *s.host_mean /= static_cast<double>(s.episodes_with_host);
    if (s.episodes > 0) s.guest_mean /= static_cast<double>(s.episodes);
  };
  for (auto& [name, s] : by_category) {
    finish(s);
    summary.categories.push_back(std::move(s));
  }
  finish(summary.overall);
  return summary;
}

}  // namespace podcorpus::roles
