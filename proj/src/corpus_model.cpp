#include "podcorpus/corpus_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include "json.hpp"

#include "podcorpus/text.hpp"

namespace podcorpus {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Date

std::int64_t Date::to_days() const noexcept {
  // Hinnant's days_from_civil.
  const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned m = month;
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_days(std::int64_t z) noexcept {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (m <= 2 ? 1 : 0)), m, d};
}

bool Date::valid() const noexcept {
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                     31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const unsigned limit = kDays[month - 1] + ((month == 2 && leap) ? 1 : 0);
  return day <= limit;
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto number = [&](std::size_t pos, std::size_t len, auto& out) {
    auto first = text.data() + pos;
    auto last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
  };
  Date d;
  if (!number(0, 4, d.year) || !number(5, 2, d.month) || !number(8, 2, d.day)) {
    return std::nullopt;
  }
  if (!d.valid()) return std::nullopt;
  return d;
}

std::string Date::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

// ---------------------------------------------------------------------------
// Categories

namespace {

constexpr std::array<std::string_view, 20> kCategories = {
    "arts",     "business", "comedy",  "education",  "fiction",
    "government", "health", "history", "kids",       "leisure",
    "music",    "news",     "religion", "science",   "society",
    "sports",   "technology", "true crime", "tv",    "unknown",
};

struct CategoryAlias {
  std::string_view prefix;
  std::string_view tag;
};

// Matched against the lowercased raw label by prefix, first hit wins.
constexpr std::array<CategoryAlias, 22> kAliases = {{
    {"religion", "religion"},   {"spirituality", "religion"},
    {"society", "society"},     {"culture", "society"},
    {"kids", "kids"},           {"family", "kids"},
    {"health", "health"},       {"fitness", "health"},
    {"tv", "tv"},               {"film", "tv"},
    {"true crime", "true crime"}, {"sport", "sports"},
    {"technolog", "technology"}, {"news", "news"},
    {"arts", "arts"},           {"business", "business"},
    {"comedy", "comedy"},       {"education", "education"},
    {"fiction", "fiction"},     {"government", "government"},
    {"history", "history"},     {"science", "science"},
}};

}  // namespace

std::span<const std::string_view> category_registry() { return kCategories; }

bool is_registered_category(std::string_view tag) {
  return std::find(kCategories.begin(), kCategories.end(), tag) != kCategories.end();
}

std::string canonical_category(std::string_view raw) {
  std::string lowered = text::to_lower(text::trim(raw));
  if (is_registered_category(lowered)) return lowered;
  for (const auto& alias : kAliases) {
    if (lowered.starts_with(alias.prefix)) return std::string(alias.tag);
  }
  if (lowered == "leisure" || lowered.starts_with("hobbies")) return "leisure";
  if (lowered.starts_with("music")) return "music";
  return "unknown";
}

// ---------------------------------------------------------------------------
// Enums

std::string_view to_string(TurnRole role) noexcept {
  switch (role) {
    case TurnRole::Host: return "Host";
    case TurnRole::Guest: return "Guest";
    case TurnRole::Unknown: break;
  }
  return "Unknown";
}

std::string_view to_string(RoleLabel label) noexcept {
  switch (label) {
    case RoleLabel::Host: return "Host";
    case RoleLabel::Guest: return "Guest";
    case RoleLabel::Neither: break;
  }
  return "Neither";
}

TurnRole parse_turn_role(std::string_view text) {
  if (text == "Host") return TurnRole::Host;
  if (text == "Guest") return TurnRole::Guest;
  if (text == "Unknown") return TurnRole::Unknown;
  throw SchemaError("unknown turn role '" + std::string(text) + "'");
}

RoleLabel parse_role_label(std::string_view text) {
  std::string lowered = text::to_lower(text);
  if (lowered == "host") return RoleLabel::Host;
  if (lowered == "guest") return RoleLabel::Guest;
  if (lowered == "neither") return RoleLabel::Neither;
  throw SchemaError("unknown role label '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// EpisodeRecord

bool EpisodeRecord::has_flag(std::string_view flag) const {
  return std::find(quality.flags.begin(), quality.flags.end(), flag) != quality.flags.end();
}

void EpisodeRecord::add_flag(std::string flag) {
  if (!has_flag(flag)) quality.flags.push_back(std::move(flag));
}

double round_ms(double seconds) noexcept {
  return std::round(seconds * 1000.0) / 1000.0;
}

bool is_two_token_name(std::string_view name) {
  auto tokens = text::split_whitespace(name);
  return tokens.size() == 2 && text::trim(name).size() == name.size() &&
         name.find("  ") == std::string_view::npos;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> validate_episode(const EpisodeRecord& r) {
  std::vector<std::string> report;
  auto fail = [&](std::string what) {
    if (std::find(report.begin(), report.end(), what) == report.end()) {
      report.push_back(std::move(what));
    }
  };

  if (r.podcast.podcast_id.empty()) fail("podcast id");
  if (r.episode.episode_id.empty()) fail("episode id");
  if (r.episode.podcast_id != r.podcast.podcast_id) fail("podcast key");
  if (!is_registered_category(r.podcast.category)) fail("category");
  if (r.episode.duration_s && *r.episode.duration_s < 0) fail("duration");
  if (r.episode.publication_date && !r.episode.publication_date->valid()) {
    fail("publication date");
  }

  double previous_start = -1.0;
  for (const auto& w : r.words) {
    if (!std::isfinite(w.start_s) || !std::isfinite(w.end_s) || w.start_s < 0.0 ||
        w.end_s < w.start_s) {
      fail("word time order");
    }
    if (w.start_s < previous_start) fail("word start order");
    previous_start = std::max(previous_start, w.start_s);
    const int present = int(w.f0_mean.has_value()) + int(w.f1_mean.has_value()) +
                        int(w.mfcc_mean.has_value());
    if (present != 0 && present != 3) fail("word prosody");
    bool finite = (!w.f0_mean || std::isfinite(*w.f0_mean)) &&
                  (!w.f1_mean || std::isfinite(*w.f1_mean));
    if (w.mfcc_mean) {
      for (double v : *w.mfcc_mean) finite = finite && std::isfinite(v);
    }
    if (!finite) fail("prosody finite");
  }

  for (std::size_t i = 0; i < r.turns.size(); ++i) {
    const Turn& t = r.turns[i];
    if (t.text.empty()) fail("turn text");
    if (t.end_s < t.start_s) fail("turn time order");
    if (t.word_begin > t.word_end || t.word_end > r.words.size()) fail("turn range");
    if (i > 0) {
      if (t.start_s < r.turns[i - 1].start_s) fail("turn order");
      if (t.speaker == r.turns[i - 1].speaker) fail("turn speaker alternation");
    }
  }

  for (const auto& role : r.roles) {
    if (!is_two_token_name(role.name)) fail("role name");
    if (!(role.confidence >= 0.0 && role.confidence <= 1.0)) fail("role confidence");
  }

  if (r.topics) {
    if (r.topics->episode_id != r.episode.episode_id) fail("topic episode key");
    double sum = 0.0;
    for (double v : r.topics->theta) {
      if (!(v >= 0.0)) fail("topic nonnegative");
      sum += v;
    }
    if (!(std::abs(sum - 1.0) <= 1e-9)) fail("topic normalization");
  }

  if (const auto& rep = r.quality.repetition) {
    const bool consistent =
        rep->max_fourgram_count <= rep->total_fourgrams &&
        (rep->total_fourgrams == 0
             ? rep->ratio == 0.0
             : std::abs(rep->ratio * double(rep->total_fourgrams) -
                        double(rep->max_fourgram_count)) <= 1e-9);
    if (!consistent) fail("repetition score");
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

json prosody_json(const std::optional<Prosody>& p) {
  if (!p) return nullptr;
  return json{{"f0", p->f0}, {"f1", p->f1}, {"mfcc", p->mfcc}};
}

std::optional<Prosody> prosody_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Prosody{j.at("f0").get<double>(), j.at("f1").get<double>(),
                 j.at("mfcc").get<Mfcc>()};
}

json word_json(const WordRecord& w, bool with_speaker) {
  json j{{"token", w.token},
         {"start_s", round_ms(w.start_s)},
         {"end_s", round_ms(w.end_s)},
         {"f0_mean", optional_json(w.f0_mean)},
         {"f1_mean", optional_json(w.f1_mean)},
         {"mfcc_mean", optional_json(w.mfcc_mean)}};
  if (with_speaker) j["speaker"] = optional_json(w.speaker);
  return j;
}

WordRecord word_from(const json& j) {
  WordRecord w;
  w.token = j.at("token").get<std::string>();
  w.start_s = j.at("start_s").get<double>();
  w.end_s = j.at("end_s").get<double>();
  w.f0_mean = optional_from<double>(j, "f0_mean");
  w.f1_mean = optional_from<double>(j, "f1_mean");
  w.mfcc_mean = optional_from<Mfcc>(j, "mfcc_mean");
  w.speaker = optional_from<std::string>(j, "speaker");
  return w;
}

json turn_json(const Turn& t) {
  return json{{"turn_id", t.turn_id},
              {"speaker", t.speaker},
              {"role", to_string(t.role)},
              {"speaker_name", optional_json(t.speaker_name)},
              {"text", t.text},
              {"start_s", round_ms(t.start_s)},
              {"end_s", round_ms(t.end_s)},
              {"prosody", prosody_json(t.prosody)},
              {"word_begin", t.word_begin},
              {"word_end", t.word_end}};
}

Turn turn_from(const json& j) {
  Turn t;
  t.turn_id = j.at("turn_id").get<int>();
  t.speaker = j.at("speaker").get<std::string>();
  t.role = parse_turn_role(j.at("role").get<std::string>());
  t.speaker_name = optional_from<std::string>(j, "speaker_name");
  t.text = j.at("text").get<std::string>();
  t.start_s = j.at("start_s").get<double>();
  t.end_s = j.at("end_s").get<double>();
  t.prosody = prosody_from(j.at("prosody"));
  t.word_begin = j.at("word_begin").get<std::size_t>();
  t.word_end = j.at("word_end").get<std::size_t>();
  return t;
}

json episode_json(const EpisodeRecord& r) {
  const auto& p = r.podcast;
  const auto& e = r.episode;
  json words = json::array();
  for (const auto& w : r.words) words.push_back(word_json(w, true));
  json turns = json::array();
  for (const auto& t : r.turns) turns.push_back(turn_json(t));
  json roles = json::array();
  for (const auto& a : r.roles) {
    roles.push_back(json{{"name", a.name},
                         {"label", to_string(a.label)},
                         {"confidence", a.confidence},
                         {"source_episode", a.source_episode}});
  }
  json topics = nullptr;
  if (r.topics) topics = json{{"episode_id", r.topics->episode_id}, {"theta", r.topics->theta}};
  json repetition = nullptr;
  if (const auto& rep = r.quality.repetition) {
    repetition = json{{"max_fourgram_count", rep->max_fourgram_count},
                      {"total_fourgrams", rep->total_fourgrams},
                      {"ratio", rep->ratio}};
  }
  return json{
      {"podcast",
       {{"podcast_id", p.podcast_id},
        {"title", p.title},
        {"category", p.category},
        {"hosting_platform", p.hosting_platform},
        {"feed_url", p.feed_url},
        {"description", p.description},
        {"language", p.language}}},
      {"episode",
       {{"episode_id", e.episode_id},
        {"podcast_id", e.podcast_id},
        {"title", e.title},
        {"description", e.description},
        {"publication_date",
         e.publication_date ? json(e.publication_date->to_iso()) : json(nullptr)},
        {"duration_s", optional_json(e.duration_s)},
        {"language", e.language}}},
      {"words", std::move(words)},
      {"turns", std::move(turns)},
      {"roles", std::move(roles)},
      {"topics", std::move(topics)},
      {"quality",
       {{"repetition", std::move(repetition)},
        {"repetitive", r.quality.repetitive},
        {"trimmed_tail_words", r.quality.trimmed_tail_words},
        {"retained_speakers", optional_json(r.quality.retained_speakers)},
        {"flags", r.quality.flags}}},
  };
}

EpisodeRecord episode_from(const json& j) {
  EpisodeRecord r;
  const json& p = j.at("podcast");
  r.podcast.podcast_id = p.at("podcast_id").get<std::string>();
  r.podcast.title = p.at("title").get<std::string>();
  r.podcast.category = p.at("category").get<std::string>();
  r.podcast.hosting_platform = p.at("hosting_platform").get<std::string>();
  r.podcast.feed_url = p.at("feed_url").get<std::string>();
  r.podcast.description = p.at("description").get<std::string>();
  r.podcast.language = p.at("language").get<std::string>();

  const json& e = j.at("episode");
  r.episode.episode_id = e.at("episode_id").get<std::string>();
  r.episode.podcast_id = e.at("podcast_id").get<std::string>();
  r.episode.title = e.at("title").get<std::string>();
  r.episode.description = e.at("description").get<std::string>();
  if (auto date = optional_from<std::string>(e, "publication_date")) {
    r.episode.publication_date = Date::parse_iso(*date);
    if (!r.episode.publication_date) throw SchemaError("bad publication_date '" + *date + "'");
  }
  r.episode.duration_s = optional_from<std::int64_t>(e, "duration_s");
  r.episode.language = e.at("language").get<std::string>();

  for (const auto& w : j.at("words")) r.words.push_back(word_from(w));
  for (const auto& t : j.at("turns")) r.turns.push_back(turn_from(t));
  for (const auto& a : j.at("roles")) {
    r.roles.push_back(RoleAssignment{a.at("name").get<std::string>(),
                                     parse_role_label(a.at("label").get<std::string>()),
                                     a.at("confidence").get<double>(),
                                     a.at("source_episode").get<std::string>()});
  }
  if (const json& t = j.at("topics"); !t.is_null()) {
    r.topics = EpisodeTopics{t.at("episode_id").get<std::string>(),
                             t.at("theta").get<std::vector<double>>()};
  }
  const json& q = j.at("quality");
  if (const json& rep = q.at("repetition"); !rep.is_null()) {
    r.quality.repetition = RepetitionScore{rep.at("max_fourgram_count").get<std::size_t>(),
                                           rep.at("total_fourgrams").get<std::size_t>(),
                                           rep.at("ratio").get<double>()};
  }
  r.quality.repetitive = q.at("repetitive").get<bool>();
  r.quality.trimmed_tail_words = q.at("trimmed_tail_words").get<std::size_t>();
  r.quality.retained_speakers = optional_from<int>(q, "retained_speakers");
  r.quality.flags = q.at("flags").get<std::vector<std::string>>();
  return r;
}

std::string header_line(std::string_view kind) {
  return json{{"schema_version", kSchemaVersion}, {"kind", kind}}.dump();
}

// Calls `on_record(json, line_no)` for every record line after checking the
// header. Wraps any failure in a ParseError carrying the line number.
template <class F>
void for_each_record(const std::filesystem::path& path, std::string_view kind, F&& on_record) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": malformed line: " + ex.what(),
                       line_no);
    }
    if (!header_seen) {
      header_seen = true;
      if (!j.is_object() || !j.contains("schema_version")) {
        throw SchemaError(path.string() + ": missing schema_version header");
      }
      if (j.at("schema_version") != kSchemaVersion) {
        throw SchemaError(path.string() + ": schema_version " +
                          j.at("schema_version").dump() + " unsupported (expected " +
                          std::to_string(kSchemaVersion) + ")");
      }
      if (j.value("kind", std::string(kind)) != kind) {
        throw SchemaError(path.string() + ": expected kind '" + std::string(kind) + "'");
      }
      continue;
    }
    try {
      on_record(j);
    } catch (const json::exception& ex) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": invalid record: " + ex.what(),
                       line_no);
    } catch (const SchemaError& ex) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": invalid record: " + ex.what(),
                       line_no);
    }
  }
}

void write_lines(const std::filesystem::path& path, std::string_view kind,
                 const std::vector<std::string>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << header_line(kind) << '\n';
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::string episode_to_json_line(const EpisodeRecord& record) {
  return episode_json(record).dump();
}

EpisodeRecord episode_from_json_line(std::string_view line) {
  try {
    return episode_from(json::parse(line));
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed episode record: ") + ex.what(), 1);
  }
}

void write_episode_jsonl(const std::filesystem::path& path,
                         std::span<const EpisodeRecord> records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(episode_to_json_line(r));
  write_lines(path, "episodes", lines);
}

std::vector<EpisodeRecord> read_episode_jsonl(const std::filesystem::path& path) {
  std::vector<EpisodeRecord> out;
  for_each_record(path, "episodes", [&](const json& j) { out.push_back(episode_from(j)); });
  return out;
}

void write_turn_jsonl(const std::filesystem::path& path,
                      std::span<const EpisodeRecord> records) {
  std::vector<std::string> lines;
  for (const auto& r : records) {
    for (const auto& t : r.turns) {
      json j = turn_json(t);
      j["turn_key"] = r.episode.episode_id + "#" + std::to_string(t.turn_id);
      j["episode_id"] = r.episode.episode_id;
      j["podcast_id"] = r.podcast.podcast_id;
      json words = json::array();
      for (std::size_t i = t.word_begin; i < t.word_end && i < r.words.size(); ++i) {
        const auto& w = r.words[i];
        if (w.speaker && *w.speaker == t.speaker) words.push_back(word_json(w, false));
      }
      j["words"] = std::move(words);
      lines.push_back(j.dump());
    }
  }
  write_lines(path, "turns", lines);
}

std::vector<TurnRow> read_turn_jsonl(const std::filesystem::path& path) {
  std::vector<TurnRow> out;
  for_each_record(path, "turns", [&](const json& j) {
    TurnRow row;
    row.turn_key = j.at("turn_key").get<std::string>();
    row.episode_id = j.at("episode_id").get<std::string>();
    row.podcast_id = j.at("podcast_id").get<std::string>();
    row.turn = turn_from(j);
    for (const auto& w : j.at("words")) {
      row.words.push_back(word_from(w));
      row.words.back().speaker = row.turn.speaker;
    }
    out.push_back(std::move(row));
  });
  return out;
}

}  // namespace podcorpus
