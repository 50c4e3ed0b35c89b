#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "podcorpus/corpus_model.hpp"
#include "support/fixtures.hpp"
#include "support/tmp.hpp"

using namespace podcorpus;

namespace {

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("dates convert through day numbers") {
  CHECK(Date{1970, 1, 1}.to_days() == 0);
  CHECK(Date{2000, 3, 1}.to_days() - Date{2000, 2, 28}.to_days() == 2);
  CHECK(Date::from_days(Date{2020, 5, 25}.to_days()) == Date{2020, 5, 25});
  CHECK(Date::parse_iso("2020-02-29") == Date{2020, 2, 29});
  CHECK_FALSE(Date::parse_iso("2019-02-29"));
  CHECK_FALSE(Date::parse_iso("2020-5-1"));
  CHECK(Date{2020, 6, 1}.to_iso() == "2020-06-01");
  for (std::int64_t d = -1000; d < 40000; d += 7) CHECK(Date::from_days(d).to_days() == d);
}

TEST_CASE("category tags map onto the registry") {
  CHECK(canonical_category("Religion & Spirituality") == "religion");
  CHECK(canonical_category("Sports") == "sports");
  CHECK(canonical_category("True Crime") == "true crime");
  CHECK(canonical_category("") == "unknown");
  CHECK(canonical_category("Underwater Basket Weaving") == "unknown");
  for (auto tag : category_registry()) CHECK(is_registered_category(tag));
  CHECK_FALSE(is_registered_category("Sports"));
}

TEST_CASE("validate_episode on a well-formed episode is empty") {
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(validate_episode(fixture::episode(s)).empty());
}

TEST_CASE("validate_episode reports violations") {
  auto r = fixture::episode(1);
  SUBCASE("word time order") {
    r.words[3].end_s = r.words[3].start_s - 0.1;
    CHECK(has(validate_episode(r), "word time order"));
  }
  SUBCASE("topic normalization") {
    r.topics->theta = {0.5, 0.6};
    CHECK(has(validate_episode(r), "topic normalization"));
  }
  SUBCASE("negative topic mass") {
    r.topics->theta = {1.5, -0.5};
    CHECK(has(validate_episode(r), "topic nonnegative"));
  }
  SUBCASE("podcast key") {
    r.episode.podcast_id = "other";
    CHECK(has(validate_episode(r), "podcast key"));
  }
  SUBCASE("partial prosody") {
    r.words[0].f0_mean = 1.0;
    r.words[0].f1_mean.reset();
    CHECK(has(validate_episode(r), "word prosody"));
  }
  SUBCASE("one-token role name") {
    r.roles[0].name = "Madonna";
    CHECK(has(validate_episode(r), "role name"));
  }
  SUBCASE("confidence out of range") {
    r.roles[0].confidence = 1.5;
    CHECK(has(validate_episode(r), "role confidence"));
  }
  SUBCASE("turn range") {
    r.turns[0].word_end = r.words.size() + 5;
    CHECK(has(validate_episode(r), "turn range"));
  }
}

TEST_CASE("validate_episode is total on odd records") {
  EpisodeRecord empty;
  CHECK_NOTHROW(validate_episode(empty));
  auto r = fixture::episode(2);
  r.words[0].start_s = std::numeric_limits<double>::quiet_NaN();
  r.words[1].f0_mean = std::numeric_limits<double>::infinity();
  r.topics->theta.clear();
  r.turns.push_back(r.turns.front());
  CHECK_NOTHROW(validate_episode(r));
  CHECK_FALSE(validate_episode(r).empty());
}

TEST_CASE("episode JSONL round trip") {
  const auto dir = testutil::fresh_dir("corpus_model");
  SUBCASE("empty list") {
    write_episode_jsonl(dir / "empty.jsonl", std::vector<EpisodeRecord>{});
    CHECK(read_episode_jsonl(dir / "empty.jsonl").empty());
    testutil::spit(dir / "zero.jsonl", "");
    CHECK(read_episode_jsonl(dir / "zero.jsonl").empty());
  }
  SUBCASE("three records") {
    std::vector<EpisodeRecord> records = {fixture::episode(1), fixture::episode(2),
                                          fixture::episode(3)};
    records[1].topics.reset();
    records[1].episode.publication_date.reset();
    records[1].episode.duration_s.reset();
    write_episode_jsonl(dir / "three.jsonl", records);
    CHECK(read_episode_jsonl(dir / "three.jsonl") == records);
  }
  SUBCASE("random records") {
    std::vector<EpisodeRecord> records;
    for (std::uint64_t s = 10; s < 60; ++s) records.push_back(fixture::episode(s, 5 + s % 50));
    write_episode_jsonl(dir / "many.jsonl", records);
    auto back = read_episode_jsonl(dir / "many.jsonl");
    CHECK(back == records);
    write_episode_jsonl(dir / "again.jsonl", back);
    CHECK(testutil::slurp(dir / "many.jsonl") == testutil::slurp(dir / "again.jsonl"));
  }
}

TEST_CASE("episode JSONL errors") {
  const auto dir = testutil::fresh_dir("corpus_model_errors");
  std::vector<EpisodeRecord> records = {fixture::episode(1), fixture::episode(2),
                                        fixture::episode(3)};
  write_episode_jsonl(dir / "ok.jsonl", records);
  auto text = testutil::slurp(dir / "ok.jsonl");

  SUBCASE("truncated line names its line number") {
    // Cut the third line (second record) in half.
    std::size_t line2 = text.find('\n') + 1;
    std::size_t line3 = text.find('\n', line2) + 1;
    std::size_t line4 = text.find('\n', line3) + 1;
    std::string cut = text.substr(0, line3 + (line4 - line3) / 2) + "\n" + text.substr(line4);
    testutil::spit(dir / "cut.jsonl", cut);
    try {
      read_episode_jsonl(dir / "cut.jsonl");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.position() == 3);
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
  }
  SUBCASE("schema version mismatch") {
    auto bumped = text;
    bumped.replace(bumped.find("\"schema_version\":1"), 18, "\"schema_version\":2");
    testutil::spit(dir / "v2.jsonl", bumped);
    CHECK_THROWS_AS(read_episode_jsonl(dir / "v2.jsonl"), SchemaError);
  }
  SUBCASE("missing header") {
    testutil::spit(dir / "nohdr.jsonl", text.substr(text.find('\n') + 1));
    CHECK_THROWS_AS(read_episode_jsonl(dir / "nohdr.jsonl"), SchemaError);
  }
  SUBCASE("turn file is not an episode file") {
    write_turn_jsonl(dir / "turns.jsonl", records);
    CHECK_THROWS_AS(read_episode_jsonl(dir / "turns.jsonl"), SchemaError);
  }
}

TEST_CASE("turn JSONL carries a key back to the episode") {
  const auto dir = testutil::fresh_dir("corpus_model_turns");
  std::vector<EpisodeRecord> records = {fixture::episode(4), fixture::episode(5)};
  write_turn_jsonl(dir / "turns.jsonl", records);
  auto rows = read_turn_jsonl(dir / "turns.jsonl");
  std::size_t expected = records[0].turns.size() + records[1].turns.size();
  REQUIRE(rows.size() == expected);
  std::size_t i = 0;
  for (const auto& rec : records) {
    for (const auto& t : rec.turns) {
      const auto& row = rows[i++];
      CHECK(row.episode_id == rec.episode.episode_id);
      CHECK(row.podcast_id == rec.podcast.podcast_id);
      CHECK(row.turn_key == rec.episode.episode_id + "#" + std::to_string(t.turn_id));
      CHECK(row.turn == t);
      std::size_t labeled = 0;
      for (std::size_t w = t.word_begin; w < t.word_end; ++w) labeled += rec.words[w].speaker.has_value();
      CHECK(row.words.size() == labeled);
    }
  }
}

TEST_CASE("two-token names") {
  CHECK(is_two_token_name("Jane Doe"));
  CHECK_FALSE(is_two_token_name("Madonna"));
  CHECK_FALSE(is_two_token_name("Mary Jane Doe"));
  CHECK(round_ms(1.23449) == doctest::Approx(1.234));
}
