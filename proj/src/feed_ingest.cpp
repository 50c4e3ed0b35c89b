#include "podcorpus/feed_ingest.hpp"

#include <expat.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <memory>
#include <stdexcept>

#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

namespace podcorpus::feed {

namespace {

struct ItemState {
  std::string guid;
  std::string title;
  std::string description;
  std::string summary;
  std::string pub_date;
  std::string duration;
  std::string enclosure_url;
  std::string language;
};

struct FeedHandler {
  std::vector<std::string> path;
  std::vector<std::string> text;

  bool channel_seen = false;
  std::string title;
  std::string description;
  std::string summary;
  std::string language;
  std::string category;
  std::string plain_category;
  std::string self_link;
  std::string first_enclosure;

  std::optional<ItemState> item;
  std::vector<ItemState> items;

  bool parent_is(std::string_view name) const {
    return path.size() >= 2 && path[path.size() - 2] == name;
  }
  bool in_channel() const { return path.size() >= 2 && parent_is("channel"); }
  bool in_item() const { return item.has_value() && parent_is("item"); }
};

const char* attribute(const XML_Char** attrs, std::string_view name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (name == attrs[i]) return attrs[i + 1];
  }
  return nullptr;
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto& h = *static_cast<FeedHandler*>(data);
  h.path.emplace_back(name);
  h.text.emplace_back();
  std::string_view el = name;

  if (el == "channel") {
    h.channel_seen = true;
  } else if (el == "item" && h.parent_is("channel")) {
    h.item.emplace();
  } else if (el == "itunes:category" && h.in_channel() && h.category.empty()) {
    if (const char* t = attribute(attrs, "text")) h.category = t;
  } else if (el == "atom:link" && h.in_channel()) {
    const char* rel = attribute(attrs, "rel");
    const char* href = attribute(attrs, "href");
    if (rel && href && std::string_view(rel) == "self") h.self_link = href;
  } else if (el == "enclosure" && h.in_item()) {
    if (const char* url = attribute(attrs, "url")) {
      h.item->enclosure_url = url;
      if (h.first_enclosure.empty()) h.first_enclosure = url;
    }
  }
}

void XMLCALL on_end(void* data, const XML_Char* name) {
  auto& h = *static_cast<FeedHandler*>(data);
  std::string_view el = name;
  std::string value(text::trim(h.text.back()));

  if (el == "item" && h.item && h.path.size() >= 2 && h.parent_is("channel")) {
    h.items.push_back(std::move(*h.item));
    h.item.reset();
  } else if (h.in_item()) {
    auto& it = *h.item;
    if (el == "guid") it.guid = value;
    else if (el == "title") it.title = value;
    else if (el == "description") it.description = value;
    else if (el == "itunes:summary" || el == "content:encoded") {
      if (it.summary.empty()) it.summary = value;
    } else if (el == "pubDate") it.pub_date = value;
    else if (el == "itunes:duration") it.duration = value;
    else if (el == "dc:language" || el == "language") it.language = value;
  } else if (h.in_channel()) {
    if (el == "title") h.title = value;
    else if (el == "description") h.description = value;
    else if (el == "itunes:summary") h.summary = value;
    else if (el == "language") h.language = value;
    else if (el == "category" && h.plain_category.empty()) h.plain_category = value;
  }

  h.path.pop_back();
  h.text.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto& h = *static_cast<FeedHandler*>(data);
  if (!h.text.empty()) h.text.back().append(s, static_cast<std::size_t>(len));
}

struct ParserDeleter {
  void operator()(XML_Parser p) const noexcept { XML_ParserFree(p); }
};
using ParserPtr = std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter>;

std::optional<int> month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  if (name.size() < 3) return std::nullopt;
  std::string lowered = text::to_lower(name.substr(0, 3));
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (kMonths[i] == lowered) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// Zone designator to offset in minutes east of UTC.
std::optional<int> zone_offset(std::string_view zone) {
  if (zone.empty()) return 0;
  if (zone.size() == 5 && (zone[0] == '+' || zone[0] == '-') && all_digits(zone.substr(1))) {
    int hh = 0;
    int mm = 0;
    parse_int(zone.substr(1, 2), hh);
    parse_int(zone.substr(3, 2), mm);
    int minutes = hh * 60 + mm;
    return zone[0] == '-' ? -minutes : minutes;
  }
  if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int hh = 0;
    int mm = 0;
    if (!parse_int(zone.substr(1, 2), hh) || !parse_int(zone.substr(4, 2), mm)) {
      return std::nullopt;
    }
    int minutes = hh * 60 + mm;
    return zone[0] == '-' ? -minutes : minutes;
  }
  struct Named {
    std::string_view name;
    int minutes;
  };
  static constexpr std::array<Named, 12> kZones = {{{"GMT", 0},
                                                   {"UT", 0},
                                                   {"UTC", 0},
                                                   {"Z", 0},
                                                   {"EST", -300},
                                                   {"EDT", -240},
                                                   {"CST", -360},
                                                   {"CDT", -300},
                                                   {"MST", -420},
                                                   {"MDT", -360},
                                                   {"PST", -480},
                                                   {"PDT", -420}}};
  for (const auto& z : kZones) {
    if (z.name == zone) return z.minutes;
  }
  return std::nullopt;
}

std::optional<Date> shift_to_utc(Date local, int h, int m, int s, int offset_minutes) {
  if (!local.valid() || h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 60) {
    return std::nullopt;
  }
  std::int64_t seconds = local.to_days() * 86400 + h * 3600 + m * 60 + s -
                         static_cast<std::int64_t>(offset_minutes) * 60;
  std::int64_t days = seconds >= 0 ? seconds / 86400 : -((-seconds + 86399) / 86400);
  return Date::from_days(days);
}

bool parse_clock(std::string_view clock, int& h, int& m, int& s) {
  auto parts = text::split(clock, ':');
  if (parts.size() < 2 || parts.size() > 3) return false;
  if (!parse_int(std::string_view(parts[0]), h) || !parse_int(std::string_view(parts[1]), m)) {
    return false;
  }
  s = 0;
  if (parts.size() == 3) {
    std::string_view sec = parts[2];
    if (auto dot = sec.find('.'); dot != std::string_view::npos) sec = sec.substr(0, dot);
    if (!parse_int(sec, s)) return false;
  }
  return true;
}

std::optional<Date> parse_iso_datetime(std::string_view raw) {
  if (raw.size() < 10) return std::nullopt;
  auto date = Date::parse_iso(raw.substr(0, 10));
  if (!date) return std::nullopt;
  if (raw.size() == 10) return date;
  if (raw[10] != 'T' && raw[10] != ' ') return std::nullopt;
  std::string_view rest = raw.substr(11);
  std::size_t zone_pos = rest.find_first_of("Z+-");
  std::string_view clock = rest.substr(0, zone_pos);
  std::string_view zone = zone_pos == std::string_view::npos ? "" : rest.substr(zone_pos);
  int h = 0;
  int m = 0;
  int s = 0;
  if (!parse_clock(clock, h, m, s)) return std::nullopt;
  auto offset = zone_offset(zone);
  if (!offset) return std::nullopt;
  return shift_to_utc(*date, h, m, s, *offset);
}

}  // namespace

std::optional<Date> parse_pub_date(std::string_view raw) {
  raw = text::trim(raw);
  if (raw.empty()) return std::nullopt;
  if (std::isdigit(static_cast<unsigned char>(raw[0])) && raw.size() >= 10 && raw[4] == '-') {
    return parse_iso_datetime(raw);
  }

  auto tokens = text::split_whitespace(raw);
  std::size_t i = 0;
  // Optional weekday ("Fri," or "Fri").
  if (i < tokens.size() && !tokens[i].empty() &&
      std::isalpha(static_cast<unsigned char>(tokens[i][0]))) {
    ++i;
  }
  if (tokens.size() < i + 3) return std::nullopt;
  int day = 0;
  int year = 0;
  if (!parse_int(std::string_view(tokens[i]), day)) return std::nullopt;
  auto month = month_from_name(tokens[i + 1]);
  if (!month) return std::nullopt;
  if (!all_digits(tokens[i + 2]) || !parse_int(std::string_view(tokens[i + 2]), year)) {
    return std::nullopt;
  }
  if (tokens[i + 2].size() == 2) year += year < 50 ? 2000 : 1900;
  i += 3;

  int h = 0;
  int m = 0;
  int s = 0;
  if (i < tokens.size()) {
    if (!parse_clock(tokens[i], h, m, s)) return std::nullopt;
    ++i;
  }
  std::string_view zone = i < tokens.size() ? std::string_view(tokens[i]) : std::string_view();
  auto offset = zone_offset(zone);
  if (!offset) return std::nullopt;
  if (day < 1) return std::nullopt;
  Date local{year, static_cast<unsigned>(*month), static_cast<unsigned>(day)};
  return shift_to_utc(local, h, m, s, *offset);
}

std::optional<std::int64_t> parse_duration(std::string_view raw) {
  raw = text::trim(raw);
  if (raw.empty()) return std::nullopt;
  auto parts = text::split(raw, ':');
  if (parts.size() > 3) return std::nullopt;
  std::int64_t total = 0;
  for (const auto& part : parts) {
    if (!all_digits(part) || part.size() > 12) return std::nullopt;
    std::int64_t v = 0;
    if (!parse_int(std::string_view(part), v)) return std::nullopt;
    total = total * 60 + v;
  }
  return total;
}

std::string url_host(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  url.remove_prefix(scheme + 3);
  auto end = url.find_first_of("/:?#");
  std::string host = text::to_lower(url.substr(0, end));
  if (host.find_first_of(" \t") != std::string::npos) return {};
  if (host.starts_with("www.")) host.erase(0, 4);
  return host;
}

ParsedFeed parse_feed(const FeedDocument& doc, std::string_view podcast_id,
                      std::string_view feed_url) {
  if (text::trim(doc.raw_xml).empty()) throw ParseError("feed: empty document", 0);

  FeedHandler handler;
  ParserPtr parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw std::bad_alloc();
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  if (XML_Parse(parser.get(), doc.raw_xml.data(), static_cast<int>(doc.raw_xml.size()), 1) ==
      XML_STATUS_ERROR) {
    auto offset = XML_GetCurrentByteIndex(parser.get());
    auto pos = offset < 0 ? std::size_t{0} : static_cast<std::size_t>(offset);
    throw ParseError(std::string("feed: ") + XML_ErrorString(XML_GetErrorCode(parser.get())) +
                         " at byte " + std::to_string(pos),
                     pos);
  }
  if (!handler.channel_seen) throw StructureError("feed: document has no <channel>");

  ParsedFeed out;
  PodcastMeta& p = out.podcast;
  p.podcast_id = std::string(podcast_id);
  p.title = handler.title;
  p.description = handler.description.empty() ? handler.summary : handler.description;
  p.language = handler.language;
  p.category = canonical_category(handler.category.empty() ? handler.plain_category
                                                           : handler.category);
  p.feed_url = !feed_url.empty() ? std::string(feed_url) : handler.self_link;
  p.hosting_platform = url_host(!p.feed_url.empty() ? p.feed_url : handler.first_enclosure);

  for (std::size_t i = 0; i < handler.items.size(); ++i) {
    const ItemState& it = handler.items[i];
    IngestedEpisode ep;
    EpisodeMeta& m = ep.meta;
    m.episode_id = !it.guid.empty() ? it.guid : p.podcast_id + ":" + std::to_string(i);
    m.podcast_id = p.podcast_id;
    m.title = it.title;
    m.description = !it.description.empty() ? it.description : it.summary;
    m.language = !it.language.empty() ? it.language : p.language;
    m.publication_date = parse_pub_date(it.pub_date);
    if (!m.publication_date) {
      ep.flags.emplace_back("date_absent");
      if (!text::trim(it.pub_date).empty()) ep.flags.emplace_back("date_unparsed");
    }
    m.duration_s = parse_duration(it.duration);
    if (!m.duration_s && !text::trim(it.duration).empty()) {
      ep.flags.emplace_back("duration_unparsed");
    }
    if (m.language.empty()) ep.flags.emplace_back("language_absent");
    out.episodes.push_back(std::move(ep));
  }
  return out;
}

bool language_matches(std::string_view language, std::string_view prefix) noexcept {
  return !language.empty() && text::starts_with_ci(text::trim(language), prefix);
}

ScopeResult filter_scope(std::span<const EpisodeMeta> episodes, const DateRange& range,
                         std::string_view language_prefix) {
  if (range.last < range.first) {
    throw std::invalid_argument("filter_scope: date range start after end");
  }
  ScopeResult result;
  for (const auto& e : episodes) {
    if (!e.publication_date) {
      ++result.dropped_no_date;
    } else if (*e.publication_date < range.first || range.last < *e.publication_date) {
      ++result.dropped_out_of_window;
    } else if (!language_matches(e.language, language_prefix)) {
      ++result.dropped_language;
    } else {
      result.retained.push_back(e);
    }
  }
  return result;
}

FeedDocument load_feed_file(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error("feed: cannot open " + path.string());
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(file, gzclose);
  FeedDocument doc;
  std::array<char, 1 << 15> buffer{};
  for (;;) {
    int n = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (n < 0) {
      int code = 0;
      throw Error("feed: read error in " + path.string() + ": " + gzerror(file, &code));
    }
    if (n == 0) break;
    doc.raw_xml.append(buffer.data(), static_cast<std::size_t>(n));
  }
  return doc;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  const std::size_t id_col = table.column("podcast_id");
  const std::size_t path_col = table.column("feed_path");
  std::optional<std::size_t> url_col;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "feed_url") url_col = i;
  }
  std::vector<ManifestEntry> out;
  for (const auto& row : table.rows) {
    ManifestEntry e;
    e.podcast_id = row[id_col];
    std::filesystem::path feed = row[path_col];
    e.feed_path = feed.is_absolute() ? feed : path.parent_path() / feed;
    if (url_col) e.feed_url = row[*url_col];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace podcorpus::feed
