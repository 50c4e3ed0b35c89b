#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::feed {

struct FeedDocument {
  std::string raw_xml;
  std::string fetched_at;  // ISO-8601 timestamp, informational
};

// Structural problem in a well-formed XML document (e.g. no <channel>).
class StructureError : public Error {
 public:
  using Error::Error;
};

struct IngestedEpisode {
  EpisodeMeta meta;
  std::vector<std::string> flags;  // e.g. "date_absent", "duration_unparsed"
};

struct ParsedFeed {
  PodcastMeta podcast;
  std::vector<IngestedEpisode> episodes;
};

// Parses an RSS 2.0 document. `podcast_id` keys the podcast; items without a
// <guid> get "<podcast_id>:<index>" ids. Throws ParseError (byte offset) on
// malformed XML and StructureError when <channel> is missing.
ParsedFeed parse_feed(const FeedDocument& doc, std::string_view podcast_id,
                      std::string_view feed_url = {});

// "SS", "MM:SS" or "HH:MM:SS" with non-negative integer components.
std::optional<std::int64_t> parse_duration(std::string_view raw);

// RFC 822 / RFC 2822 dates as used by <pubDate>, plus ISO-8601. Returns the
// calendar date in UTC after applying the zone offset.
std::optional<Date> parse_pub_date(std::string_view raw);

// Host part of a URL ("https://anchor.fm/s/x/rss" -> "anchor.fm").
std::string url_host(std::string_view url);

struct DateRange {
  Date first;
  Date last;  // inclusive
};

struct ScopeResult {
  std::vector<EpisodeMeta> retained;
  std::size_t dropped_out_of_window = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_no_date = 0;

  std::size_t dropped() const noexcept {
    return dropped_out_of_window + dropped_language + dropped_no_date;
  }
};

// Case-insensitive language prefix match.
bool language_matches(std::string_view language, std::string_view prefix) noexcept;

// Keeps episodes dated inside `range` whose language matches `language_prefix`.
// Throws std::invalid_argument when range.first > range.last.
ScopeResult filter_scope(std::span<const EpisodeMeta> episodes, const DateRange& range,
                         std::string_view language_prefix);

// Reads a feed file, transparently inflating gzip.
FeedDocument load_feed_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string podcast_id;
  std::filesystem::path feed_path;
  std::string feed_url;
};

// CSV with columns podcast_id, feed_path and optional feed_url. Relative
// feed paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace podcorpus::feed
