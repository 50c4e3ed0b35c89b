#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "podcorpus/analytics.hpp"
#include "podcorpus/csv.hpp"
#include "support/fixtures.hpp"
#include "support/tmp.hpp"

using namespace podcorpus;
using namespace podcorpus::analytics;

namespace {

Date day(unsigned d) { return Date{2020, 6, d}; }

TopicObservation obs(unsigned d, std::vector<double> theta, std::string category = "news") {
  return {day(d), std::move(category), std::move(theta)};
}

MentionObservation said(unsigned d, std::string podcast, bool m, std::string category = "news") {
  return {day(d), std::move(podcast), std::move(category), m};
}

std::vector<WordRecord> words_of(std::initializer_list<const char*> toks) {
  std::vector<WordRecord> out;
  double t = 0;
  for (const char* s : toks) {
    out.push_back({s, t, t + 0.2});
    t += 0.3;
  }
  return out;
}

// Straight loop over the trailing window.
std::optional<double> trailing(const std::vector<std::optional<double>>& v, std::size_t t, std::size_t w) {
  if (!v[t]) return std::nullopt;
  double s = 0;
  int n = 0;
  for (std::size_t i = t + 1 > w ? t + 1 - w : 0; i <= t; ++i) {
    if (v[i]) {
      s += *v[i];
      ++n;
    }
  }
  return s / n;
}

}  // namespace

TEST_CASE("rolling mean") {
  std::vector<std::optional<double>> flat(10, 4.0);
  for (auto v : rolling_mean(flat, 3)) CHECK(v == 4.0);

  std::vector<std::optional<double>> gap = {1.0, std::nullopt, 3.0, 5.0};
  auto r = rolling_mean(gap, 3);
  CHECK(r[0] == 1.0);
  CHECK_FALSE(r[1]);
  CHECK(r[2] == 2.0);
  CHECK(r[3] == 4.0);
  CHECK_THROWS_AS(rolling_mean(gap, 0), std::invalid_argument);

  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::optional<double>> v(1 + rng() % 30);
    for (auto& x : v) {
      if (rng() % 4) x = static_cast<double>(rng() % 1000) / 10.0;
    }
    const std::size_t w = 1 + rng() % 7;
    auto out = rolling_mean(v, w);
    const double c = 17.5;
    std::vector<std::optional<double>> shifted = v;
    for (auto& x : shifted) {
      if (x) *x += c;
    }
    auto out_shift = rolling_mean(shifted, w);
    for (std::size_t t = 0; t < v.size(); ++t) {
      auto e = trailing(v, t, w);
      REQUIRE(out[t].has_value() == e.has_value());
      if (!e) continue;
      CHECK(*out[t] == doctest::Approx(*e).epsilon(1e-12));
      CHECK(*out_shift[t] == doctest::Approx(*e + c).epsilon(1e-12));
    }
  }
}

TEST_CASE("interval helpers") {
  boost::math::students_t t4(4);
  CHECK(t_half_width(2.0, 5) ==
        doctest::Approx(boost::math::quantile(t4, 0.975) * 2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(z975() == doctest::Approx(1.959963984540054).epsilon(1e-12));

  std::vector<double> one = {42.0};
  auto e = mean_with_ci(one, 0, 100);
  CHECK(e.wide);
  CHECK(e.ci.low == 0.0);
  CHECK(e.ci.high == 100.0);

  std::vector<double> xs = {11, 12, 13};
  auto m = mean_with_ci(xs, 0, 100);
  CHECK(m.mean == 12.0);
  CHECK(m.ci.low == doctest::Approx(12.0 - boost::math::quantile(boost::math::students_t(2), 0.975) / std::sqrt(3.0)));
  std::vector<double> low = {1, 2, 3};
  CHECK(mean_with_ci(low, 0, 100).ci.low == 0.0);

  auto p = proportion_ci(1, 4);
  CHECK(p.low == doctest::Approx(std::max(0.0, 0.25 - z975() * std::sqrt(0.25 * 0.75 / 4))));
  CHECK(p.high == doctest::Approx(0.25 + z975() * std::sqrt(0.25 * 0.75 / 4)));
  CHECK(proportion_ci(0, 5).low == 0.0);
  CHECK(proportion_ci(5, 5).high == 1.0);
  CHECK_THROWS_AS(proportion_ci(3, 2), std::invalid_argument);
}

TEST_CASE("topic time series") {
  const std::vector<std::size_t> topic = {0};
  SUBCASE("constant share") {
    std::vector<TopicObservation> eps;
    for (unsigned d = 1; d <= 6; ++d) {
      eps.push_back(obs(d, {0.3, 0.7}));
      eps.push_back(obs(d, {0.3, 0.7}));
    }
    auto s = topic_timeseries(eps, topic);
    REQUIRE(s.points.size() == 6);
    for (const auto& p : s.points) CHECK(*p.value == doctest::Approx(30.0));
  }
  SUBCASE("daily mean over episodes") {
    std::vector<TopicObservation> eps = {obs(1, {0.01, 0.99}), obs(1, {0.02, 0.98}), obs(1, {0.03, 0.97})};
    auto s = topic_timeseries(eps, topic, {.window = 1});
    REQUIRE(s.points.size() == 1);
    CHECK(*s.points[0].value == doctest::Approx(2.0));
    CHECK(s.points[0].n == 3);
    CHECK_FALSE(s.points[0].wide);
  }
  SUBCASE("single episode day is wide") {
    std::vector<TopicObservation> eps = {obs(3, {0.4, 0.6})};
    auto s = topic_timeseries(eps, topic, {.window = 1});
    CHECK(s.points[0].wide);
    CHECK(*s.points[0].ci_low == 0.0);
    CHECK(*s.points[0].ci_high == 100.0);
  }
  SUBCASE("a missing day stays missing") {
    std::vector<TopicObservation> eps = {obs(1, {0.1, 0.9}), obs(3, {0.3, 0.7})};
    auto s = topic_timeseries(eps, topic);
    REQUIRE(s.points.size() == 3);
    CHECK(s.points[1].date == day(2));
    CHECK_FALSE(s.points[1].value);
    CHECK(s.points[1].n == 0);
    CHECK(*s.points[2].value == doctest::Approx(20.0));
  }
  SUBCASE("category and share threshold") {
    std::vector<TopicObservation> eps = {obs(1, {0.9, 0.1}), obs(1, {0.1, 0.9}), obs(1, {0.8, 0.2}, "sports")};
    auto s = topic_timeseries(eps, topic, {.window = 1, .category = "news", .share_threshold = 0.5});
    CHECK(*s.points[0].value == doctest::Approx(50.0));
    CHECK(s.points[0].n == 2);
    CHECK_THROWS_AS(topic_timeseries(eps, std::vector<std::size_t>{5}), std::out_of_range);
  }
  SUBCASE("bounds bracket the value") {
    std::mt19937 rng(8);
    std::vector<TopicObservation> eps;
    for (int i = 0; i < 200; ++i) {
      double a = (rng() % 1001) / 1000.0;
      eps.push_back(obs(1 + rng() % 28, {a, 1 - a}));
    }
    for (std::size_t w : {1u, 3u, 7u}) {
      for (const auto& p : topic_timeseries(eps, topic, {.window = w}).points) {
        if (!p.value) continue;
        CHECK(*p.ci_low <= *p.value + 1e-9);
        CHECK(*p.value <= *p.ci_high + 1e-9);
        CHECK(*p.ci_low >= 0.0);
        CHECK(*p.ci_high <= 100.0);
      }
    }
  }
}

TEST_CASE("phrase mentions") {
  CHECK(transcript_mentions(words_of({"we", "talked", "about", "George", "Floyd's", "death"}), "george floyd's"));
  CHECK(transcript_mentions(words_of({"GEORGE", "FLOYD,", "today"}), "George Floyd"));
  CHECK_FALSE(transcript_mentions(words_of({"george", "and", "floyd"}), "george floyd"));
  CHECK_FALSE(transcript_mentions(words_of({"george"}), "george floyd"));
  std::vector<std::string> toks = {"a", "b"};
  CHECK_THROWS_AS(contains_phrase(toks, std::vector<std::string>{}), std::invalid_argument);

  std::vector<MentionObservation> eps = {said(1, "a", true), said(1, "b", false), said(1, "c", false),
                                         said(1, "d", false)};
  auto s = mention_rate(eps, 1);
  CHECK(*s.points[0].value == doctest::Approx(25.0));

  std::vector<MentionObservation> none = {said(1, "a", false), said(1, "b", false)};
  auto z = mention_rate(none, 1);
  CHECK(*z.points[0].value == 0.0);
  CHECK(*z.points[0].ci_low == 0.0);
}

TEST_CASE("show mention share") {
  std::vector<MentionObservation> eps;
  for (int i = 0; i < 10; ++i) eps.push_back(said(1, "p" + std::to_string(i), i < 2));
  eps.push_back(said(2, "p0", true));
  eps.push_back(said(3, "p5", false));
  CHECK(show_mention_share(eps) == doctest::Approx(0.2));
  CHECK_THROWS_AS(show_mention_share(std::vector<MentionObservation>{}), std::invalid_argument);
}

TEST_CASE("category feature summary") {
  auto a = fixture::episode(1);
  auto b = fixture::episode(2);
  for (auto* e : {&a, &b}) e->podcast.category = "news";
  for (auto& w : a.words) {
    if (w.has_prosody()) w.f0_mean = 10.0;
  }
  for (auto& w : b.words) {
    if (w.has_prosody()) w.f0_mean = 12.0;
  }
  auto c = fixture::episode(3);
  c.podcast.category = "sports";
  auto d = fixture::episode(4);
  d.podcast.category = "comedy";
  for (auto& w : d.words) {
    w.f0_mean.reset();
    w.f1_mean.reset();
    w.mfcc_mean.reset();
  }
  CHECK(*episode_feature_mean(a, Feature::F0) == 10.0);
  CHECK_FALSE(episode_feature_mean(d, Feature::F0));

  std::vector<EpisodeRecord> eps = {a, b, c, d};
  auto s = category_feature_summary(eps, Feature::F0);
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].category == "news");
  CHECK(s.rows[0].mean == doctest::Approx(11.0));
  CHECK(s.rows[0].episodes == 2);
  CHECK(s.rows[0].ci_low < 11.0);
  CHECK(s.rows[1].category == "sports");
  CHECK(s.notes.size() == 2);

  std::vector<EpisodeRecord> single_cat = {a, b};
  CHECK(category_feature_summary(single_cat, Feature::F0).rows.size() == 1);
  CHECK(parse_feature("mfcc3") == Feature::Mfcc3);
  CHECK(to_string(Feature::F1) == "f1");
  CHECK_THROWS_AS(parse_feature("f7"), std::invalid_argument);
}

TEST_CASE("descriptive tables") {
  auto e = duration_ecdf({30, 10, 20, 20});
  REQUIRE(e.size() == 3);
  CHECK(e[0].duration_s == 10);
  CHECK(e[0].cumulative_fraction == 0.25);
  CHECK(e[1].cumulative_fraction == 0.75);
  CHECK(e[2].cumulative_fraction == 1.0);
  CHECK(duration_ecdf({}).empty());

  auto a = fixture::episode(1);
  auto b = fixture::episode(2);
  auto c = fixture::episode(3);
  a.podcast.podcast_id = b.podcast.podcast_id = "p";
  c.podcast.podcast_id = "q";
  a.podcast.hosting_platform = b.podcast.hosting_platform = "libsyn.com";
  c.podcast.hosting_platform = "";
  a.podcast.category = b.podcast.category = "news";
  c.podcast.category = "sports";
  std::vector<EpisodeRecord> eps = {a, b, c};
  auto cats = category_counts(eps);
  CHECK(cats.at("news") == 2);
  auto plat = platform_counts(eps);
  CHECK(plat.at("libsyn.com") == 1);
  CHECK(plat.at("unknown") == 1);
}

TEST_CASE("series csv") {
  const auto dir = testutil::fresh_dir("analytics");
  std::vector<TopicObservation> eps = {obs(1, {0.25, 0.75}), obs(3, {0.5, 0.5})};
  const std::vector<std::size_t> topic = {0};
  write_series_csv(dir / "s.csv", topic_timeseries(eps, topic, {.window = 1}));
  auto table = csv::read_file(dir / "s.csv");
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][0] == "2020-06-01");
  CHECK(table.rows[0][1] == "25");
  CHECK(table.rows[1][1].empty());
  CHECK(table.rows[0][5] == "1");
  CHECK(format_number(0.1 + 0.2) == "0.3");
}
