// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "podcorpus/analytics.hpp"
#include "podcorpus/guest_network.hpp"
#include "podcorpus/lda.hpp"
#include "podcorpus/pipeline.hpp"
#include "podcorpus/role_inference.hpp"
#include "podcorpus/transcript_quality.hpp"
#include "podcorpus/turn_assembly.hpp"
#include "support/oracles.hpp"
#include "support/tmp.hpp"

using namespace podcorpus;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: " << what << "; ";
      pass = false;
    }
  }
};

Outcome modularity_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int graphs = 0;
  while (graphs < 200) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng() % 2) edges.emplace_back(i, j);
      }
    }
    if (edges.empty()) continue;
    std::vector<std::size_t> comm(n);
    for (auto& c : comm) c = rng() % n;
    auto got = network::modularity(network::GuestGraph::from_edges(n, edges), network::Partition{comm});
    worst = std::max(worst, std::abs(got - oracle::modularity(n, edges, comm)));
    ++graphs;
  }
  o.require(worst <= 1e-12, "max deviation above 1e-12");
  const std::vector<std::pair<std::size_t, std::size_t>> two = {{0, 1}, {2, 3}};
  auto g = network::GuestGraph::from_edges(4, two);
  o.require(network::modularity(g, {{0, 0, 1, 1}}) == 0.5, "two-edge fixture is not 0.5");
  o.require(network::modularity(g, {{0, 0, 0, 0}}) == 0.0, "single community is not 0");
  o.detail << graphs << " graphs, max |dQ| " << worst;
  return o;
}

Outcome fourgram_filter() {
  Outcome o;
  auto episode_of = [](const std::vector<std::string>& toks) {
    EpisodeRecord r;
    double t = 0.0;
    for (const auto& s : toks) {
      r.words.push_back({s, t, t + 0.2});
      t += 0.25;
    }
    return r;
  };
  std::vector<std::string> loop;
  for (int i = 0; i < 10; ++i) {
    for (const char* s : {"thank", "you", "so", "much"}) loop.push_back(s);
  }
  auto rep = episode_of(loop);
  o.require(quality::filter_repetitive(rep, 0.05) == quality::Decision::Remove, "repeated phrase kept");
  const double loop_ratio = rep.quality.repetition->ratio;
  o.require(std::abs(loop_ratio - 0.270) < 0.001, "repeated phrase ratio not 0.270");

  std::vector<std::string> distinct;
  for (int i = 0; i < 1000; ++i) distinct.push_back("w" + std::to_string(i));
  auto natural = episode_of(distinct);
  o.require(quality::filter_repetitive(natural, 0.05) == quality::Decision::Keep, "distinct text removed");
  const double natural_ratio = natural.quality.repetition->ratio;
  o.require(std::abs(natural_ratio - 1.0 / 997.0) < 1e-15, "distinct text ratio");

  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::string> toks;
    for (int n = 20 + trial * 3; n > 0; --n) toks.push_back(std::to_string(rng() % (2 + trial)));
    bool removed_before = true;
    for (int step = 0; step <= 100; ++step) {
      auto r = episode_of(toks);
      bool removed = quality::filter_repetitive(r, step / 100.0) == quality::Decision::Remove;
      o.require(!removed || removed_before, "not monotone in threshold");
      removed_before = removed;
    }
  }
  o.detail << "loop ratio " << loop_ratio << ", distinct ratio " << natural_ratio;
  return o;
}

Outcome alignment_conservation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t frames_total = 0;
  for (int e = 0; e < 50; ++e) {
    auto ep = oracle::random_episode(rng, 40 + e * 5);
    auto expected = oracle::frame_means(ep.words, ep.frames);
    auto owner = turns::assign_frames(ep.words, ep.frames);
    o.require(owner == expected.owner, "frame owner differs from brute force");
    // Every frame overlapping some word has exactly one owner.
    for (std::size_t f = 0; f < ep.frames.size(); ++f) {
      bool overlaps = false;
      for (const auto& w : ep.words) {
        overlaps |= std::min(w.end_s, ep.frames[f].window_end_s) - std::max(w.start_s, ep.frames[f].window_start_s) > 0;
      }
      o.require(overlaps == owner[f].has_value(), "overlapping frame unassigned");
    }
    frames_total += ep.frames.size();
    auto out = turns::align_prosody(ep.words, ep.frames);
    for (std::size_t w = 0; w < out.size(); ++w) {
      o.require(out[w].has_prosody() == expected.means[w].has_value(), "prosody presence differs");
      if (!expected.means[w] || !out[w].has_prosody()) continue;
      const auto& m = *expected.means[w];
      std::array<double, 6> got = {*out[w].f0_mean, *out[w].f1_mean, (*out[w].mfcc_mean)[0],
                                   (*out[w].mfcc_mean)[1], (*out[w].mfcc_mean)[2], (*out[w].mfcc_mean)[3]};
      for (std::size_t k = 0; k < 6; ++k) worst = std::max(worst, std::abs(got[k] - m[k]));
    }
    std::vector<WordRecord> labeled = out;
    for (auto& w : labeled) {
      if (rng() % 6) w.speaker = std::string(1, 'A' + static_cast<char>(rng() % 3));
    }
    std::vector<std::string> want, have;
    for (const auto& w : labeled) {
      if (w.speaker) want.push_back(w.token);
    }
    for (const auto& t : turns::segment_turns(labeled)) {
      for (std::size_t i = t.word_begin; i < t.word_end; ++i) {
        if (labeled[i].speaker) have.push_back(labeled[i].token);
      }
    }
    o.require(want == have, "turn segmentation changed the token sequence");
  }
  o.require(worst <= 1e-9, "mean deviation above 1e-9");
  o.detail << "50 episodes, " << frames_total << " frames, max |dmean| " << worst;
  return o;
}

Outcome speaker_rules() {
  Outcome o;
  std::vector<WordRecord> words;
  for (int i = 0; i < 100; ++i) {
    WordRecord w{"t" + std::to_string(i), i * 1.0, i * 1.0 + 0.5};
    w.speaker = i < 97 ? "A" : "M";
    words.push_back(w);
  }
  auto r = turns::filter_minor_speakers(words);
  o.require(r.removed == std::vector<std::string>{"M"}, "3% speaker not removed");
  for (int i = 97; i < 100; ++i) o.require(!r.words[i].speaker, "3% speaker label survived");
  for (int i = 0; i < 97; ++i) o.require(r.words[i].speaker == "A", "major speaker label lost");

  std::vector<turns::DiarizationSegment> segs = {{"B", 12.0, 14.0}, {"A", 10.0, 20.0}};
  std::vector<WordRecord> contested = {{"x", 12.5, 13.0}, {"y", 13.5, 13.9}};
  auto out = turns::assign_speakers(contested, segs);
  o.require(out[0].speaker == "A" && out[1].speaker == "A", "contested words not given to the earlier speaker");
  o.detail << "3% speaker dropped, contested words -> " << out[0].speaker.value_or("-");
  return o;
}

Outcome alpha_oracle() {
  Outcome o;
  using M = roles::AnnotationMatrix;
  auto L = [](const char* s) { return std::optional<std::string>(s); };
  double fixture = roles::krippendorff_alpha(M{{L("a"), L("a")}, {L("b"), L("b")}, {L("a"), L("b")}});
  o.require(std::abs(fixture - 4.0 / 9.0) <= 1e-9, "3-item fixture is not 4/9");

  double worst = 0.0;
  std::size_t matrices = 0, defined = 0;
  const char* labels[] = {nullptr, "a", "b"};
  for (std::size_t items = 1; items <= 4; ++items) {
    for (std::size_t coders = 1; coders <= 3; ++coders) {
      const std::size_t cells = items * coders;
      std::size_t combos = 1;
      for (std::size_t c = 0; c < cells; ++c) combos *= 3;
      for (std::size_t code = 0; code < combos; ++code) {
        M m(items, std::vector<std::optional<std::string>>(coders));
        std::size_t x = code;
        for (std::size_t c = 0; c < cells; ++c, x /= 3) {
          if (labels[x % 3]) m[c / coders][c % coders] = labels[x % 3];
        }
        ++matrices;
        auto expected = oracle::krippendorff_alpha(m);
        if (!expected) {
          bool threw = false;
          try {
            roles::krippendorff_alpha(m);
          } catch (const std::invalid_argument&) {
            threw = true;
          }
          o.require(threw, "undefined alpha did not raise");
          continue;
        }
        ++defined;
        worst = std::max(worst, std::abs(roles::krippendorff_alpha(m) - *expected));
      }
    }
  }
  o.require(worst <= 1e-12, "oracle deviation above 1e-12");
  o.detail << "fixture " << fixture << ", " << matrices << " matrices (" << defined
           << " defined), max |dalpha| " << worst;
  return o;
}

Outcome lda_recovery() {
  Outcome o;
  auto c = oracle::planted_corpus(42, 500, 5, 50, 100);
  std::size_t tokens = 0;
  for (const auto& d : c.docs) tokens += d.size();
  topics::LdaConfig cfg;
  cfg.topics = 5;
  cfg.iterations = 500;
  cfg.seed = 7;
  std::size_t checkpoints = 0;
  auto model = topics::fit_lda(c.docs, 50, cfg, [&](std::size_t it, const topics::TopicModel& m) {
    if (it % 100 != 0) return;
    ++checkpoints;
    o.require(std::accumulate(m.topic_word.begin(), m.topic_word.end(), std::size_t{0}) == tokens,
              "topic-word counts not conserved");
    o.require(std::accumulate(m.doc_topic.begin(), m.doc_topic.end(), std::size_t{0}) == tokens,
              "doc-topic counts not conserved");
    for (std::size_t k = 0; k < m.topics; ++k) {
      std::size_t row = 0;
      for (std::size_t w = 0; w < m.vocab_size; ++w) row += m.count(k, w);
      o.require(row == m.topic_totals[k], "topic totals inconsistent");
      auto phi = m.phi(k);
      o.require(std::abs(std::accumulate(phi.begin(), phi.end(), 0.0) - 1.0) < 1e-9, "phi not normalized");
    }
    for (std::size_t d = 0; d < m.documents(); ++d) {
      auto th = m.theta(d);
      o.require(std::abs(std::accumulate(th.begin(), th.end(), 0.0) - 1.0) < 1e-9, "theta not normalized");
    }
  });
  o.require(checkpoints == 5, "observer missed checkpoints");
  std::vector<std::vector<double>> fitted;
  for (std::size_t k = 0; k < model.topics; ++k) fitted.push_back(model.phi(k));
  const double overlap = oracle::greedy_top_overlap(c.topic_word, fitted, 10);
  o.require(overlap >= 0.6, "top-10 overlap below 0.6");
  o.detail << "mean top-10 overlap " << overlap << ", " << checkpoints << " checkpoints";
  return o;
}

Outcome role_classifier() {
  Outcome o;
  roles::CuePhraseClassifier clf;
  auto suite = oracle::cue_suite(31, 200);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    auto ep = oracle::episode_from_text("cue" + std::to_string(i), suite[i].sentence);
    for (const auto& r : roles::infer_roles(ep, clf)) {
      if (r.name == suite[i].name) {
        correct += r.label == suite[i].label;
        break;
      }
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(suite.size());
  o.require(accuracy >= 0.90, "accuracy below 0.90");

  std::mt19937 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<roles::ScoredMention> v;
    double best = -1.0;
    for (int k = 1 + rng() % 8; k > 0; --k) {
      roles::ScoredMention s;
      s.mention.name = "Pat Kim";
      s.mention.char_offset = rng() % 1000;
      s.mention.source = rng() % 2 ? roles::MentionSource::Transcript : roles::MentionSource::EpisodeDescription;
      s.prediction = {static_cast<RoleLabel>(rng() % 3), (rng() % 21) / 20.0};
      best = std::max(best, s.prediction.confidence);
      v.push_back(s);
    }
    o.require(roles::aggregate_mentions(v).confidence == best, "aggregate is not the max");
  }
  o.detail << "accuracy " << accuracy << " (" << correct << "/" << suite.size() << ")";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const fs::path corpus = PODCORPUS_MINI_CORPUS;
  auto base = pipeline::PipelineConfig::load(corpus / "config.json");
  std::vector<fs::path> dirs;
  std::size_t episodes = 0;
  for (int run = 0; run < 2; ++run) {
    auto cfg = base;
    cfg.work_dir = testutil::fresh_dir("acceptance_run" + std::to_string(run));
    dirs.push_back(cfg.work_dir);
    auto result = pipeline::run_pipeline(cfg);
    for (const auto& m : result.stages) {
      o.require(m.conserved(), "count conservation broken at " + std::string(pipeline::to_string(m.stage)));
      auto back = pipeline::read_stage_manifest(pipeline::stage_dir(cfg, m.stage) / "manifest.json");
      o.require(back.input == back.retained + back.rejected, "written manifest not conserved");
      if (m.stage == pipeline::Stage::Clean) episodes = m.input;
    }
  }
  o.require(episodes == 20, "mini corpus does not yield 20 episodes");
  std::size_t compared = 0;
  for (const char* f : {"network/edges.csv", "network/nodes.csv", "network/modularity.csv", "topics/theta.csv",
                        "series/topic_series.csv", "series/mention_series.csv"}) {
    o.require(fs::exists(dirs[0] / f), std::string("missing ") + f);
    o.require(testutil::slurp(dirs[0] / f) == testutil::slurp(dirs[1] / f), std::string("differs: ") + f);
    ++compared;
  }
  o.detail << episodes << " episodes, " << compared << " files byte-identical";
  return o;
}

Outcome series_sanity() {
  Outcome o;
  std::vector<std::optional<double>> flat(30, 12.5);
  for (std::size_t w = 1; w <= 7; ++w) {
    for (auto v : analytics::rolling_mean(flat, w)) o.require(v && *v == 12.5, "constant series not constant");
  }
  std::vector<analytics::MentionObservation> day = {{Date{2020, 6, 1}, "a", "news", true},
                                                    {Date{2020, 6, 1}, "b", "news", false},
                                                    {Date{2020, 6, 1}, "c", "news", false},
                                                    {Date{2020, 6, 1}, "d", "news", false}};
  const double rate = *analytics::mention_rate(day).points[0].value;
  o.require(std::abs(rate - 25.0) < 1e-12, "mention rate is not 25%");

  std::mt19937 rng(5);
  std::size_t points = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<analytics::TopicObservation> topic_eps;
    std::vector<analytics::MentionObservation> mention_eps;
    for (int i = 0; i < 60; ++i) {
      Date d{2020, 6, 1 + static_cast<unsigned>(rng() % 20)};
      double a = (rng() % 1001) / 1000.0;
      topic_eps.push_back({d, "news", {a, 1 - a}});
      mention_eps.push_back({d, "p" + std::to_string(rng() % 9), "news", rng() % 3 == 0});
    }
    const std::vector<std::size_t> topic = {0};
    for (std::size_t w : {1u, 3u, 5u}) {
      for (const auto& s : {analytics::topic_timeseries(topic_eps, topic, {.window = w}),
                            analytics::mention_rate(mention_eps, w)}) {
        for (const auto& p : s.points) {
          if (!p.value) continue;
          ++points;
          o.require(*p.ci_low <= *p.value + 1e-9 && *p.value <= *p.ci_high + 1e-9, "CI does not bracket value");
        }
      }
    }
  }
  o.detail << "1-in-4 rate " << rate << "%, " << points << " bracketed points";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::pair<double, std::function<Outcome()>>>> criteria = {
      {"modularity matches double-loop oracle", {5.0, modularity_oracle}},
      {"4-gram repetition filter", {1.0, fourgram_filter}},
      {"prosody alignment conservation", {10.0, alignment_conservation}},
      {"minor speaker filter and overlap rule", {0.0, speaker_rules}},
      {"krippendorff alpha matches oracle", {0.0, alpha_oracle}},
      {"lda recovers planted topics", {120.0, lda_recovery}},
      {"baseline role classifier", {0.0, role_classifier}},
      {"end-to-end determinism on mini corpus", {180.0, end_to_end}},
      {"time-series sanity", {0.0, series_sanity}},
  };
  int failed = 0;
  for (const auto& [name, entry] : criteria) {
    const auto& [budget, fn] = entry;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0 && secs >= budget) {
      o.pass = false;
      o.detail << "; over time budget " << budget << " s";
    }
    std::printf("%s  %s  [%.2f s]  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.str().c_str());
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
