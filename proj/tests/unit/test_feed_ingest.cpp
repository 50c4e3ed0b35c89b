#include <random>

#include <zlib.h>

#include "doctest.h"
#include "podcorpus/feed_ingest.hpp"
#include "support/tmp.hpp"

using namespace podcorpus;
using namespace podcorpus::feed;

namespace {

std::string rss(const std::string& items, const std::string& channel_extra = "") {
  return R"(<?xml version="1.0" encoding="UTF-8"?>
<rss version="2.0" xmlns:itunes="http://www.itunes.com/dtds/podcast-1.0.dtd">
<channel>
  <title>Test Show</title>
  <description>About things</description>
  <language>en-us</language>
  <itunes:category text="Sports"/>
)" + channel_extra + items + "</channel></rss>";
}

const char* kItem = R"(<item>
  <guid>ep-1</guid>
  <title>First &amp; best</title>
  <description><![CDATA[<p>Hello <b>world</b></p>]]></description>
  <pubDate>Mon, 25 May 2020 23:30:00 -0400</pubDate>
  <itunes:duration>01:02:03</itunes:duration>
  <enclosure url="https://traffic.libsyn.com/show/1.mp3" type="audio/mpeg"/>
</item>
)";

EpisodeMeta dated(int y, unsigned m, unsigned d, std::string lang) {
  EpisodeMeta e;
  e.episode_id = "e";
  e.publication_date = Date{y, m, d};
  e.language = std::move(lang);
  return e;
}

}  // namespace

TEST_CASE("minimal feed with one item") {
  auto feed = parse_feed({rss(kItem), ""}, "show");
  CHECK(feed.podcast.podcast_id == "show");
  CHECK(feed.podcast.title == "Test Show");
  CHECK(feed.podcast.category == "sports");
  CHECK(feed.podcast.language == "en-us");
  CHECK(feed.podcast.hosting_platform == "traffic.libsyn.com");
  REQUIRE(feed.episodes.size() == 1);
  const auto& e = feed.episodes[0].meta;
  CHECK(e.episode_id == "ep-1");
  CHECK(e.podcast_id == "show");
  CHECK(e.title == "First & best");
  CHECK(e.duration_s == 3723);
  // 23:30 at -04:00 is 03:30 UTC the next day.
  CHECK(e.publication_date == Date{2020, 5, 26});
  CHECK(e.language == "en-us");
  CHECK(feed.episodes[0].flags.empty());
}

TEST_CASE("feed with zero items") {
  auto feed = parse_feed({rss(""), ""}, "show");
  CHECK(feed.episodes.empty());
  CHECK(feed.podcast.title == "Test Show");
}

TEST_CASE("malformed pubDate leaves the date absent and flags it") {
  auto feed = parse_feed({rss("<item><guid>x</guid><pubDate>sometime soon</pubDate></item>"), ""}, "s");
  REQUIRE(feed.episodes.size() == 1);
  CHECK_FALSE(feed.episodes[0].meta.publication_date);
  const auto& flags = feed.episodes[0].flags;
  CHECK(std::find(flags.begin(), flags.end(), "date_absent") != flags.end());
  CHECK(std::find(flags.begin(), flags.end(), "date_unparsed") != flags.end());
}

TEST_CASE("items without guid get positional ids") {
  auto feed = parse_feed({rss("<item><title>a</title></item><item><title>b</title></item>"), ""}, "s");
  REQUIRE(feed.episodes.size() == 2);
  CHECK(feed.episodes[0].meta.episode_id == "s:0");
  CHECK(feed.episodes[1].meta.episode_id == "s:1");
}

TEST_CASE("feed errors") {
  SUBCASE("malformed XML reports a byte offset") {
    const std::string doc = "<rss><channel><title>x</title></chanel></rss>";
    try {
      parse_feed({doc, ""}, "s");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const auto tag = doc.find("</chanel>");
      CHECK(e.position() >= tag);
      CHECK(e.position() < tag + 9);
    }
  }
  SUBCASE("missing channel") {
    CHECK_THROWS_AS(parse_feed({"<rss version=\"2.0\"></rss>", ""}, "s"), StructureError);
  }
  SUBCASE("empty document") { CHECK_THROWS_AS(parse_feed({"", ""}, "s"), ParseError); }
}

TEST_CASE("parse_duration") {
  CHECK(parse_duration("90") == 90);
  CHECK(parse_duration("30:00") == 1800);
  CHECK(parse_duration("01:02:03") == 3600 + 120 + 3);
  CHECK(parse_duration(" 0 ") == 0);
  CHECK_FALSE(parse_duration(""));
  CHECK_FALSE(parse_duration("1:2:3:4"));
  CHECK_FALSE(parse_duration("-5"));
  CHECK_FALSE(parse_duration("12.5"));
  CHECK_FALSE(parse_duration("abc"));
  // Total and deterministic over arbitrary input.
  std::mt19937 rng(3);
  const std::string alphabet = "0123456789:. -ab";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (int n = rng() % 10; n > 0; --n) s.push_back(alphabet[rng() % alphabet.size()]);
    std::optional<std::int64_t> a, b;
    CHECK_NOTHROW(a = parse_duration(s));
    b = parse_duration(s);
    CHECK(a == b);
    if (a) CHECK(*a >= 0);
  }
}

TEST_CASE("parse_pub_date") {
  CHECK(parse_pub_date("Tue, 02 Jun 2020 09:00:00 GMT") == Date{2020, 6, 2});
  CHECK(parse_pub_date("2 Jun 2020 23:00:00 -0300") == Date{2020, 6, 3});
  CHECK(parse_pub_date("Tue, 02 Jun 2020 01:00:00 +0200") == Date{2020, 6, 1});
  CHECK(parse_pub_date("Tue, 02 Jun 2020 09:00:00 PDT") == Date{2020, 6, 2});
  CHECK(parse_pub_date("2020-06-02") == Date{2020, 6, 2});
  CHECK(parse_pub_date("2020-06-02T22:30:00-05:00") == Date{2020, 6, 3});
  CHECK_FALSE(parse_pub_date("31 Feb 2020 10:00:00 GMT"));
  CHECK_FALSE(parse_pub_date("yesterday"));
}

TEST_CASE("filter_scope") {
  const DateRange range{{2020, 5, 1}, {2020, 6, 30}};
  std::vector<EpisodeMeta> eps = {dated(2020, 5, 15, "en-US"), dated(2020, 7, 1, "en-US"),
                                  dated(2020, 5, 15, "pt-BR"), dated(2020, 5, 1, "EN"),
                                  dated(2020, 6, 30, "en")};
  eps.push_back(EpisodeMeta{});
  auto r = filter_scope(eps, range, "en");
  REQUIRE(r.retained.size() == 3);
  CHECK(r.retained[0] == eps[0]);
  CHECK(r.dropped_out_of_window == 1);
  CHECK(r.dropped_language == 1);
  CHECK(r.dropped_no_date == 1);
  CHECK(r.dropped() + r.retained.size() == eps.size());
  auto again = filter_scope(r.retained, range, "en");
  CHECK(again.retained == r.retained);
  CHECK_THROWS_AS(filter_scope(eps, DateRange{{2020, 7, 1}, {2020, 6, 1}}, "en"),
                  std::invalid_argument);
}

TEST_CASE("feed files and manifest") {
  const auto dir = testutil::fresh_dir("feed_ingest");
  const std::string doc = rss(kItem);
  testutil::spit(dir / "plain.xml", doc);
  {
    gzFile gz = gzopen((dir / "packed.xml.gz").c_str(), "wb");
    gzwrite(gz, doc.data(), static_cast<unsigned>(doc.size()));
    gzclose(gz);
  }
  CHECK(load_feed_file(dir / "plain.xml").raw_xml == doc);
  CHECK(load_feed_file(dir / "packed.xml.gz").raw_xml == doc);
  CHECK_THROWS_AS(load_feed_file(dir / "missing.xml"), Error);

  testutil::spit(dir / "manifest.csv",
                 "podcast_id,feed_path,feed_url\na,plain.xml,https://x.example/rss\nb,packed.xml.gz,\n");
  auto entries = read_manifest(dir / "manifest.csv");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].feed_path == dir / "plain.xml");
  CHECK(entries[0].feed_url == "https://x.example/rss");
  CHECK(entries[1].feed_url.empty());
  CHECK(url_host("https://www.megaphone.fm/x?y=1") == "megaphone.fm");
  CHECK(url_host("not a url").empty());
}
