#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace podcorpus {

inline constexpr int kSchemaVersion = 1;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input at a known position. `position` is a 1-based line number
// for line-oriented formats and a byte offset for XML.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Calendar date in UTC.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  // Days since 1970-01-01.
  std::int64_t to_days() const noexcept;
  static Date from_days(std::int64_t days) noexcept;
  // Strict YYYY-MM-DD.
  static std::optional<Date> parse_iso(std::string_view text);
  std::string to_iso() const;
  bool valid() const noexcept;

  friend auto operator<=>(const Date&, const Date&) = default;
};

// Fixed category registry. Anything unrecognised maps to "unknown".
std::span<const std::string_view> category_registry();
std::string canonical_category(std::string_view raw);
bool is_registered_category(std::string_view tag);

struct PodcastMeta {
  std::string podcast_id;
  std::string title;
  std::string category = "unknown";
  std::string hosting_platform;
  std::string feed_url;
  std::string description;
  std::string language;

  friend bool operator==(const PodcastMeta&, const PodcastMeta&) = default;
};

struct EpisodeMeta {
  std::string episode_id;
  std::string podcast_id;
  std::string title;
  std::string description;
  std::optional<Date> publication_date;
  std::optional<std::int64_t> duration_s;
  std::string language;

  friend bool operator==(const EpisodeMeta&, const EpisodeMeta&) = default;
};

using Mfcc = std::array<double, 4>;

struct WordRecord {
  std::string token;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<double> f0_mean;
  std::optional<double> f1_mean;
  std::optional<Mfcc> mfcc_mean;
  std::optional<std::string> speaker;

  bool has_prosody() const noexcept {
    return f0_mean.has_value() && f1_mean.has_value() && mfcc_mean.has_value();
  }
  double duration() const noexcept { return end_s - start_s; }

  friend bool operator==(const WordRecord&, const WordRecord&) = default;
};

struct Prosody {
  double f0 = 0.0;
  double f1 = 0.0;
  Mfcc mfcc{};

  friend bool operator==(const Prosody&, const Prosody&) = default;
};

enum class TurnRole { Host, Guest, Unknown };
enum class RoleLabel { Host, Guest, Neither };

std::string_view to_string(TurnRole role) noexcept;
std::string_view to_string(RoleLabel label) noexcept;
TurnRole parse_turn_role(std::string_view text);
RoleLabel parse_role_label(std::string_view text);

struct Turn {
  int turn_id = 0;
  std::string speaker;
  TurnRole role = TurnRole::Unknown;
  std::optional<std::string> speaker_name;
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<Prosody> prosody;
  // Half-open range of episode word indices spanned by the turn. Words in the
  // range that carry no speaker label are not part of the turn.
  std::size_t word_begin = 0;
  std::size_t word_end = 0;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct RoleAssignment {
  std::string name;
  RoleLabel label = RoleLabel::Neither;
  double confidence = 0.0;
  std::string source_episode;

  friend bool operator==(const RoleAssignment&, const RoleAssignment&) = default;
};

struct EpisodeTopics {
  std::string episode_id;
  std::vector<double> theta;

  friend bool operator==(const EpisodeTopics&, const EpisodeTopics&) = default;
};

struct RepetitionScore {
  std::size_t max_fourgram_count = 0;
  std::size_t total_fourgrams = 0;
  double ratio = 0.0;

  friend bool operator==(const RepetitionScore&, const RepetitionScore&) = default;
};

struct QualityInfo {
  std::optional<RepetitionScore> repetition;
  bool repetitive = false;
  std::size_t trimmed_tail_words = 0;
  std::optional<int> retained_speakers;
  std::vector<std::string> flags;

  friend bool operator==(const QualityInfo&, const QualityInfo&) = default;
};

// One episode and everything derived from it. Unit of pipeline parallelism.
struct EpisodeRecord {
  PodcastMeta podcast;
  EpisodeMeta episode;
  std::vector<WordRecord> words;
  std::vector<Turn> turns;
  std::vector<RoleAssignment> roles;
  std::optional<EpisodeTopics> topics;
  QualityInfo quality;

  bool has_flag(std::string_view flag) const;
  void add_flag(std::string flag);

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Returns the names of violated invariants; empty when the record is valid.
// Never throws on structurally well-formed records.
std::vector<std::string> validate_episode(const EpisodeRecord& record);

// Two-token person name check used by RoleAssignment and role inference.
bool is_two_token_name(std::string_view name);

// Episode-level JSONL. First line is a schema header.
void write_episode_jsonl(const std::filesystem::path& path,
                         std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_episode_jsonl(const std::filesystem::path& path);

// Single-record JSON helpers (one line, no trailing newline).
std::string episode_to_json_line(const EpisodeRecord& record);
EpisodeRecord episode_from_json_line(std::string_view line);

// Turn-level JSONL: one turn per line, keyed back to its episode.
void write_turn_jsonl(const std::filesystem::path& path,
                      std::span<const EpisodeRecord> records);

struct TurnRow {
  std::string turn_key;
  std::string episode_id;
  std::string podcast_id;
  Turn turn;
  std::vector<WordRecord> words;
};
std::vector<TurnRow> read_turn_jsonl(const std::filesystem::path& path);

// Times are persisted with millisecond precision.
double round_ms(double seconds) noexcept;

}  // namespace podcorpus
