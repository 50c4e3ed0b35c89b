#pragma once

#include <random>
#include <string>
#include <vector>

#include "podcorpus/corpus_model.hpp"
#include "podcorpus/turn_assembly.hpp"

namespace fixture {

// Well-formed episode with ms-quantized times, prosody on most words, two
// speakers, turns built from the labels, roles and a normalized theta.
inline podcorpus::EpisodeRecord episode(std::uint64_t seed, std::size_t n_words = 40) {
  using namespace podcorpus;
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  EpisodeRecord r;
  r.podcast.podcast_id = "pod-" + std::to_string(seed % 3);
  r.podcast.title = "Show \"" + std::to_string(seed) + "\"";
  r.podcast.category = "news";
  r.podcast.hosting_platform = "anchor.fm";
  r.podcast.feed_url = "https://anchor.fm/s/x/feed.xml";
  r.podcast.description = "A show, with commas\nand newlines";
  r.podcast.language = "en-us";
  r.episode.episode_id = "ep-" + std::to_string(seed);
  r.episode.podcast_id = r.podcast.podcast_id;
  r.episode.title = "Episode " + std::to_string(seed);
  r.episode.description = "caf\xc3\xa9 talk";
  r.episode.publication_date = Date{2020, 5, static_cast<unsigned>(1 + seed % 28)};
  r.episode.duration_s = 600 + static_cast<std::int64_t>(seed % 100);
  r.episode.language = "en";

  double t = 0.0;
  std::string speaker = "S0";
  for (std::size_t i = 0; i < n_words; ++i) {
    WordRecord w;
    w.token = "word" + std::to_string(uni(0, 30));
    w.start_s = t;
    w.end_s = t + uni(50, 400) / 1000.0;
    w.start_s = round_ms(w.start_s);
    w.end_s = round_ms(w.end_s);
    t = w.end_s + uni(0, 200) / 1000.0;
    if (uni(0, 4) != 0) {
      w.f0_mean = 100.0 + uni(0, 1000) / 8.0;
      w.f1_mean = 500.0 + uni(0, 1000) / 4.0;
      w.mfcc_mean = Mfcc{uni(-100, 100) / 2.0, uni(-100, 100) / 4.0, 1.5, -0.25};
    }
    if (uni(0, 6) == 0) speaker = speaker == "S0" ? "S1" : "S0";
    if (uni(0, 9) != 0) w.speaker = speaker;
    r.words.push_back(std::move(w));
  }
  r.turns = turns::segment_turns(r.words);
  r.roles = {{"Jane Doe", RoleLabel::Host, 0.9, r.episode.episode_id},
             {"John Roe", RoleLabel::Guest, 0.6, r.episode.episode_id}};
  r.topics = EpisodeTopics{r.episode.episode_id, {0.25, 0.5, 0.125, 0.125}};
  r.quality.repetition = RepetitionScore{1, n_words - 3, 1.0 / static_cast<double>(n_words - 3)};
  r.quality.retained_speakers = 2;
  r.quality.flags = {"prosody_absent"};
  return r;
}

}  // namespace fixture
