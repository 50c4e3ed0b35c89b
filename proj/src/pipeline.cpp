#include "podcorpus/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "podcorpus/analytics.hpp"
#include "podcorpus/csv.hpp"
#include "podcorpus/feed_ingest.hpp"
#include "podcorpus/guest_network.hpp"
#include "podcorpus/lda.hpp"
#include "podcorpus/role_inference.hpp"
#include "podcorpus/text.hpp"
#include "podcorpus/transcript_quality.hpp"
#include "podcorpus/turn_assembly.hpp"

namespace podcorpus::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kConfigKeys = {
    "manifest",        "transcripts_dir",   "frames_dir",      "diar_dir",
    "work_dir",        "date_from",         "date_to",         "language",
    "fourgram_threshold", "min_speaker_share", "classifier",   "name_prob_quantile",
    "lda",             "window_days",       "series_topics",   "share_threshold",
    "mention_phrase",  "workers"};

const std::set<std::string> kLdaKeys = {"topics", "alpha", "beta", "iterations", "seed"};

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type");
  }
}

Date get_date(const json& j, const char* key) {
  auto raw = get_as<std::string>(j, key);
  auto d = Date::parse_iso(raw);
  if (!d) throw ConfigError(std::string("config: '") + key + "' is not a YYYY-MM-DD date");
  return *d;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ordered_json config_json(const PipelineConfig& c, bool for_hash) {
  ordered_json j;
  j["manifest"] = c.manifest.string();
  j["transcripts_dir"] = c.transcripts_dir.string();
  j["frames_dir"] = c.frames_dir.string();
  j["diar_dir"] = c.diar_dir.string();
  if (!for_hash) j["work_dir"] = c.work_dir.string();
  j["date_from"] = c.date_from.to_iso();
  j["date_to"] = c.date_to.to_iso();
  j["language"] = c.language;
  j["fourgram_threshold"] = c.fourgram_threshold;
  j["min_speaker_share"] = c.min_speaker_share;
  j["classifier"] = c.classifier;
  j["name_prob_quantile"] = c.name_prob_quantile;
  ordered_json lda;
  lda["topics"] = c.lda.topics;
  lda["alpha"] = c.lda.alpha ? json(*c.lda.alpha) : json(nullptr);
  lda["beta"] = c.lda.beta;
  lda["iterations"] = c.lda.iterations;
  lda["seed"] = c.lda.seed;
  j["lda"] = lda;
  j["window_days"] = c.window_days;
  j["series_topics"] = c.series_topics;
  j["share_threshold"] = c.share_threshold ? json(*c.share_threshold) : json(nullptr);
  j["mention_phrase"] = c.mention_phrase;
  if (!for_hash) j["workers"] = c.workers;
  return j;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct Outcome {
  std::optional<EpisodeRecord> record;
  std::optional<Reject> reject;
};

Reject reject_of(const EpisodeRecord& r, std::string reason) {
  return Reject{r.episode.episode_id, r.podcast.podcast_id, std::move(reason)};
}

// Applies `work` to each record on up to `workers` threads. Results keep input
// order; an exception isolates that record as a reject.
std::vector<Outcome> map_episodes(std::vector<EpisodeRecord> records, std::size_t workers,
                                  const std::function<Outcome(EpisodeRecord)>& work) {
  std::vector<Outcome> out(records.size());
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      Reject fallback = reject_of(records[i], "");
      try {
        out[i] = work(std::move(records[i]));
      } catch (const std::exception& e) {
        fallback.reason = e.what();
        out[i] = Outcome{std::nullopt, std::move(fallback)};
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, records.size()));
  if (n == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(run);
  }
  return out;
}

void write_rejects(const fs::path& path, std::span<const Reject> rejects) {
  auto out = open_out(path);
  for (const auto& r : rejects) {
    ordered_json j;
    j["episode_id"] = r.episode_id;
    j["podcast_id"] = r.podcast_id;
    j["reason"] = r.reason;
    out << j.dump() << '\n';
  }
}

struct StageOutput {
  StageManifest manifest;
  std::vector<Reject> rejects;
};

// Splits outcomes into kept records and rejects and fills the counts.
std::vector<EpisodeRecord> collect(std::vector<Outcome> outcomes, StageOutput& so) {
  std::vector<EpisodeRecord> kept;
  so.manifest.input += outcomes.size();
  for (auto& o : outcomes) {
    if (o.record) {
      kept.push_back(std::move(*o.record));
    } else {
      so.rejects.push_back(std::move(*o.reject));
    }
  }
  so.manifest.retained = kept.size();
  so.manifest.rejected = so.rejects.size();
  return kept;
}

std::vector<EpisodeRecord> read_upstream(Stage stage, const PipelineConfig& config) {
  const Stage up = *upstream(stage);
  const fs::path path = stage_dir(config, up) / "episodes.jsonl";
  if (!fs::exists(path)) {
    throw Error("stage '" + std::string(to_string(stage)) + "' needs the output of stage '" +
                std::string(to_string(up)) + "' (" + path.string() + " is missing)");
  }
  return read_episode_jsonl(path);
}

std::string check_valid(const EpisodeRecord& r) {
  auto violations = validate_episode(r);
  if (violations.empty()) return {};
  return "invalid record: " + text::join(violations, ", ");
}

StageOutput stage_ingest(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  const auto entries = feed::read_manifest(config.manifest);

  struct FeedResult {
    std::optional<feed::ParsedFeed> feed;
    std::string error;
  };
  std::vector<FeedResult> feeds(entries.size());
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        feeds[i].feed = feed::parse_feed(feed::load_feed_file(entries[i].feed_path),
                                         entries[i].podcast_id, entries[i].feed_url);
      } catch (const std::exception& e) {
        feeds[i].error = e.what();
      }
    }
  };
  {
    const std::size_t n = std::max<std::size_t>(1, std::min(config.workers, entries.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(run);
  }

  const feed::DateRange range{config.date_from, config.date_to};
  std::vector<EpisodeRecord> kept;
  std::set<std::string> seen;
  std::size_t feed_failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!feeds[i].feed) {
      ++so.manifest.input;
      ++feed_failures;
      so.rejects.push_back(Reject{"", entries[i].podcast_id, "feed: " + feeds[i].error});
      continue;
    }
    const auto& parsed = *feeds[i].feed;
    for (const auto& item : parsed.episodes) {
      ++so.manifest.input;
      const EpisodeMeta& meta = item.meta;
      auto scope = feed::filter_scope(std::span(&meta, 1), range, config.language);
      std::string reason;
      if (scope.dropped_no_date) {
        reason = "no publication date";
      } else if (scope.dropped_out_of_window) {
        reason = "outside date window";
      } else if (scope.dropped_language) {
        reason = "language mismatch";
      } else if (seen.contains(meta.episode_id)) {
        reason = "duplicate episode id";
      }
      if (!reason.empty()) {
        so.rejects.push_back(Reject{meta.episode_id, meta.podcast_id, reason});
        continue;
      }
      seen.insert(meta.episode_id);
      EpisodeRecord rec;
      rec.podcast = parsed.podcast;
      rec.episode = meta;
      for (const auto& f : item.flags) rec.add_flag(f);
      if (auto bad = check_valid(rec); !bad.empty()) {
        so.rejects.push_back(reject_of(rec, bad));
        continue;
      }
      kept.push_back(std::move(rec));
    }
  }
  so.manifest.retained = kept.size();
  so.manifest.rejected = so.rejects.size();
  so.manifest.stats["feeds"] = static_cast<double>(entries.size());
  so.manifest.stats["feed_failures"] = static_cast<double>(feed_failures);
  write_episode_jsonl(dir / "episodes.jsonl", kept);
  so.manifest.outputs.push_back("episodes.jsonl");
  return so;
}

StageOutput stage_clean(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto outcomes = map_episodes(read_upstream(Stage::Clean, config), config.workers,
                               [&](EpisodeRecord rec) -> Outcome {
    const fs::path path =
        config.transcripts_dir / (episode_file_stem(rec.episode.episode_id) + ".words.jsonl");
    if (!fs::exists(path)) return {std::nullopt, reject_of(rec, "transcript missing")};
    auto words = turns::read_words_jsonl(path);
    if (rec.episode.duration_s && *rec.episode.duration_s > 0) {
      auto trimmed = quality::trim_hallucinated_tail(words, static_cast<double>(*rec.episode.duration_s));
      rec.quality.trimmed_tail_words = trimmed.dropped;
      words = std::move(trimmed.words);
    } else {
      rec.add_flag("duration_absent");
    }
    if (words.empty()) return {std::nullopt, reject_of(rec, "empty transcript")};
    rec.words = std::move(words);
    if (quality::filter_repetitive(rec, config.fourgram_threshold) == quality::Decision::Remove) {
      return {std::nullopt, reject_of(rec, "repetitive transcript, 4-gram ratio " +
                                               analytics::format_number(rec.quality.repetition->ratio))};
    }
    if (auto bad = check_valid(rec); !bad.empty()) return {std::nullopt, reject_of(rec, bad)};
    return {std::move(rec), std::nullopt};
  });
  auto kept = collect(std::move(outcomes), so);
  write_episode_jsonl(dir / "episodes.jsonl", kept);
  so.manifest.outputs.push_back("episodes.jsonl");
  return so;
}

StageOutput stage_turns(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto outcomes = map_episodes(read_upstream(Stage::Turns, config), config.workers,
                               [&](EpisodeRecord rec) -> Outcome {
    const std::string stem = episode_file_stem(rec.episode.episode_id);
    const fs::path diar = config.diar_dir / (stem + ".diar.csv");
    if (!fs::exists(diar)) return {std::nullopt, reject_of(rec, "diarization missing")};
    std::vector<WordRecord> words = rec.words;
    const fs::path frames = config.frames_dir / (stem + ".frames.csv");
    if (!config.frames_dir.empty() && fs::exists(frames)) {
      words = turns::align_prosody(words, turns::read_frames_csv(frames));
    } else {
      rec.add_flag("prosody_absent");
    }
    words = turns::assign_speakers(words, turns::read_segments_csv(diar));
    auto filtered = turns::filter_minor_speakers(words, config.min_speaker_share);
    rec.quality.retained_speakers = static_cast<int>(filtered.retained.size());
    rec.words = std::move(filtered.words);
    rec.turns = turns::segment_turns(rec.words);
    if (rec.turns.empty()) return {std::nullopt, reject_of(rec, "no speaker turns")};
    if (auto bad = check_valid(rec); !bad.empty()) return {std::nullopt, reject_of(rec, bad)};
    return {std::move(rec), std::nullopt};
  });
  auto kept = collect(std::move(outcomes), so);
  write_episode_jsonl(dir / "episodes.jsonl", kept);
  write_turn_jsonl(dir / "turns.jsonl", kept);
  so.manifest.outputs = {"episodes.jsonl", "turns.jsonl"};
  return so;
}

// Host voices come from map_host_voice. Once a host voice is known, the other
// speakers are guests when the episode has guest assignments; a lone guest
// name is attached when exactly one other speaker remains.
void label_turns(EpisodeRecord& rec) {
  std::map<std::string, std::string> host_voice;
  std::vector<std::string> guests;
  for (const auto& r : rec.roles) {
    if (r.label == RoleLabel::Guest) guests.push_back(r.name);
    if (r.label != RoleLabel::Host) continue;
    if (auto speaker = turns::map_host_voice(rec.turns, r.name)) {
      host_voice.try_emplace(*speaker, r.name);
    }
  }
  std::set<std::string> others;
  for (const auto& t : rec.turns) {
    if (!host_voice.contains(t.speaker)) others.insert(t.speaker);
  }
  for (auto& t : rec.turns) {
    if (auto it = host_voice.find(t.speaker); it != host_voice.end()) {
      t.role = TurnRole::Host;
      t.speaker_name = it->second;
    } else if (!host_voice.empty() && !guests.empty()) {
      t.role = TurnRole::Guest;
      if (guests.size() == 1 && others.size() == 1) t.speaker_name = guests.front();
    } else {
      t.role = TurnRole::Unknown;
      t.speaker_name.reset();
    }
  }
}

StageOutput stage_roles(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto records = read_upstream(Stage::Roles, config);
  const auto classifier = roles::make_classifier(config.classifier);
  auto outcomes = map_episodes(std::move(records), config.workers, [&](EpisodeRecord rec) -> Outcome {
    rec.roles = roles::infer_roles(rec, *classifier);
    label_turns(rec);
    if (auto bad = check_valid(rec); !bad.empty()) return {std::nullopt, reject_of(rec, bad)};
    return {std::move(rec), std::nullopt};
  });
  auto kept = collect(std::move(outcomes), so);
  write_episode_jsonl(dir / "episodes.jsonl", kept);
  write_turn_jsonl(dir / "turns.jsonl", kept);
  {
    auto out = open_out(dir / "roles.csv");
    csv::write_row(out, {"episode_id", "podcast_id", "name", "label", "confidence"});
    for (const auto& rec : kept) {
      for (const auto& r : rec.roles) {
        csv::write_row(out, {rec.episode.episode_id, rec.podcast.podcast_id, r.name,
                             std::string(to_string(r.label)), analytics::format_number(r.confidence)});
      }
    }
  }
  std::size_t hosts = 0, guests = 0;
  for (const auto& rec : kept) {
    for (const auto& r : rec.roles) {
      hosts += r.label == RoleLabel::Host;
      guests += r.label == RoleLabel::Guest;
    }
  }
  so.manifest.stats["host_assignments"] = static_cast<double>(hosts);
  so.manifest.stats["guest_assignments"] = static_cast<double>(guests);
  so.manifest.outputs = {"episodes.jsonl", "turns.jsonl", "roles.csv"};
  return so;
}

StageOutput stage_network(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto records = read_upstream(Stage::Network, config);
  so.manifest.input = so.manifest.retained = records.size();

  const auto stats = network::build_name_stats(records);
  network::BipartiteReport report;
  const auto bipartite = network::build_bipartite(
      records, stats, network::BipartiteOptions{config.name_prob_quantile}, &report);
  std::map<std::string, std::string> categories;
  for (const auto& r : records) categories[r.podcast.podcast_id] = r.podcast.category;
  const auto graph = network::project_one_mode(bipartite, categories);

  network::write_edges_csv(dir / "edges.csv", graph, bipartite);
  network::write_nodes_csv(dir / "nodes.csv", graph);
  std::map<std::string, double> q;
  if (!graph.edges.empty()) {
    std::set<std::string> all;
    for (const auto& [id, c] : categories) all.insert(c);
    std::vector<std::string> extra(all.begin(), all.end());
    q = network::category_modularity(graph, extra);
  }
  network::write_modularity_csv(dir / "modularity.csv", graph, q);

  so.manifest.stats["guest_names"] = static_cast<double>(report.guest_names);
  so.manifest.stats["excluded_common"] = static_cast<double>(report.excluded_common);
  so.manifest.stats["excluded_as_host"] = static_cast<double>(report.excluded_as_host);
  so.manifest.stats["probability_threshold"] = report.probability_threshold;
  so.manifest.stats["bipartite_edges"] = static_cast<double>(bipartite.edges.size());
  so.manifest.stats["nodes"] = static_cast<double>(graph.nodes.size());
  so.manifest.stats["edges"] = static_cast<double>(graph.edges.size());
  so.manifest.outputs = {"edges.csv", "nodes.csv", "modularity.csv"};
  return so;
}

StageOutput stage_topics(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto records = read_upstream(Stage::Topics, config);
  so.manifest.input = records.size();

  topics::Vocabulary vocab;
  topics::Corpus corpus;
  std::vector<EpisodeRecord> kept;
  for (auto& rec : records) {
    auto tokens = topics::preprocess_words(rec.words);
    if (tokens.empty()) {
      so.rejects.push_back(reject_of(rec, "no topic tokens"));
      continue;
    }
    corpus.push_back(topics::to_ids(tokens, vocab, true));
    kept.push_back(std::move(rec));
  }
  so.manifest.retained = kept.size();
  so.manifest.rejected = so.rejects.size();
  if (corpus.empty()) throw Error("stage 'topics': no documents with topic tokens");

  topics::LdaConfig lda;
  lda.topics = config.lda.topics;
  lda.alpha = config.lda.alpha;
  lda.beta = config.lda.beta;
  lda.iterations = config.lda.iterations;
  lda.seed = config.lda.seed;
  const auto model = topics::fit_lda(corpus, vocab.size(), lda);

  std::vector<EpisodeTopics> thetas;
  for (std::size_t d = 0; d < kept.size(); ++d) {
    kept[d].topics = EpisodeTopics{kept[d].episode.episode_id, model.theta(d)};
    thetas.push_back(*kept[d].topics);
  }
  topics::write_vocabulary(dir / "vocabulary.txt", vocab);
  topics::write_topic_word_csv(dir / "topic_word.csv", model);
  topics::write_theta_csv(dir / "theta.csv", thetas);
  {
    auto out = open_out(dir / "top_words.csv");
    csv::write_row(out, {"topic", "rank", "word"});
    for (std::size_t k = 0; k < model.topics; ++k) {
      auto words = topics::top_words(model, vocab, k, 10);
      for (std::size_t i = 0; i < words.size(); ++i) {
        csv::write_row(out, {std::to_string(k), std::to_string(i + 1), words[i]});
      }
    }
  }
  write_episode_jsonl(dir / "episodes.jsonl", kept);
  so.manifest.stats["vocabulary"] = static_cast<double>(vocab.size());
  std::size_t tokens = 0;
  for (const auto& doc : corpus) tokens += doc.size();
  so.manifest.stats["tokens"] = static_cast<double>(tokens);
  so.manifest.stats["topics"] = static_cast<double>(model.topics);
  so.manifest.outputs = {"vocabulary.txt", "topic_word.csv", "theta.csv", "top_words.csv",
                         "episodes.jsonl"};
  return so;
}

StageOutput stage_series(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto records = read_upstream(Stage::Series, config);
  std::vector<analytics::TopicObservation> topic_obs;
  std::vector<analytics::MentionObservation> mention_obs;
  so.manifest.input = records.size();
  for (const auto& rec : records) {
    if (!rec.episode.publication_date) {
      so.rejects.push_back(reject_of(rec, "no publication date"));
      continue;
    }
    if (!rec.topics) {
      so.rejects.push_back(reject_of(rec, "no topic proportions"));
      continue;
    }
    const Date date = *rec.episode.publication_date;
    topic_obs.push_back({date, rec.podcast.category, rec.topics->theta});
    mention_obs.push_back({date, rec.podcast.podcast_id, rec.podcast.category,
                           analytics::transcript_mentions(rec.words, config.mention_phrase)});
  }
  so.manifest.retained = topic_obs.size();
  so.manifest.rejected = so.rejects.size();

  if (!config.series_topics.empty() && !topic_obs.empty()) {
    analytics::TopicSeriesOptions options;
    options.window = config.window_days;
    options.share_threshold = config.share_threshold;
    analytics::write_series_csv(dir / "topic_series.csv",
                                analytics::topic_timeseries(topic_obs, config.series_topics, options));
    so.manifest.outputs.push_back("topic_series.csv");
  }
  analytics::write_series_csv(dir / "mention_series.csv",
                              analytics::mention_rate(mention_obs, config.window_days));
  so.manifest.outputs.push_back("mention_series.csv");
  {
    auto out = open_out(dir / "mentions.csv");
    csv::write_row(out, {"episode_id", "podcast_id", "date", "mentions"});
    std::size_t j = 0;
    for (const auto& rec : records) {
      if (!rec.episode.publication_date || !rec.topics) continue;
      csv::write_row(out, {rec.episode.episode_id, rec.podcast.podcast_id,
                           mention_obs[j].date.to_iso(), mention_obs[j].mentions ? "1" : "0"});
      ++j;
    }
    so.manifest.outputs.push_back("mentions.csv");
  }
  if (!mention_obs.empty()) {
    so.manifest.stats["show_mention_share"] = analytics::show_mention_share(mention_obs);
  }
  return so;
}

StageOutput stage_report(const PipelineConfig& config, const fs::path& dir) {
  StageOutput so;
  auto records = read_upstream(Stage::Report, config);
  so.manifest.input = so.manifest.retained = records.size();

  std::vector<std::int64_t> durations;
  for (const auto& r : records) {
    if (r.episode.duration_s) durations.push_back(*r.episode.duration_s);
  }
  {
    auto out = open_out(dir / "duration_ecdf.csv");
    csv::write_row(out, {"duration_s", "cumulative_fraction"});
    for (const auto& row : analytics::duration_ecdf(durations)) {
      csv::write_row(out, {std::to_string(row.duration_s),
                           analytics::format_number(row.cumulative_fraction)});
    }
  }
  {
    auto out = open_out(dir / "category_counts.csv");
    csv::write_row(out, {"category", "episodes"});
    for (const auto& [c, n] : analytics::category_counts(records)) {
      csv::write_row(out, {c, std::to_string(n)});
    }
  }
  {
    auto out = open_out(dir / "platform_counts.csv");
    csv::write_row(out, {"platform", "podcasts"});
    for (const auto& [p, n] : analytics::platform_counts(records)) {
      csv::write_row(out, {p, std::to_string(n)});
    }
  }
  {
    std::vector<roles::EpisodeRoleSet> sets;
    for (const auto& r : records) {
      sets.push_back({r.episode.episode_id, r.podcast.category, r.roles});
    }
    auto summary = roles::role_count_summary(sets);
    auto out = open_out(dir / "role_counts.csv");
    csv::write_row(out, {"category", "episodes", "episodes_with_host", "host_mean", "guest_mean"});
    auto row = [&](const roles::CategoryRoleSummary& s) {
      csv::write_row(out, {s.category, std::to_string(s.episodes),
                           std::to_string(s.episodes_with_host),
                           s.host_mean ? analytics::format_number(*s.host_mean) : "",
                           analytics::format_number(s.guest_mean)});
    };
    for (const auto& s : summary.categories) row(s);
    row(summary.overall);
  }
  std::vector<std::string> notes;
  {
    auto summary = analytics::category_feature_summary(records, analytics::Feature::F0);
    auto out = open_out(dir / "f0_by_category.csv");
    csv::write_row(out, {"category", "episodes", "mean", "ci_low", "ci_high"});
    for (const auto& r : summary.rows) {
      csv::write_row(out, {r.category, std::to_string(r.episodes), analytics::format_number(r.mean),
                           analytics::format_number(r.ci_low), analytics::format_number(r.ci_high)});
    }
    notes = summary.notes;
  }
  {
    auto out = open_out(dir / "notes.txt");
    for (const auto& n : notes) out << n << '\n';
  }
  so.manifest.outputs = {"duration_ecdf.csv", "category_counts.csv", "platform_counts.csv",
                         "role_counts.csv", "f0_by_category.csv", "notes.txt"};
  return so;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(std::string_view json_text, const fs::path& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  PipelineConfig c;
  auto path_key = [&](const char* key, fs::path& out) {
    if (j.contains(key)) out = resolve(get_as<std::string>(j, key), base);
  };
  path_key("manifest", c.manifest);
  path_key("transcripts_dir", c.transcripts_dir);
  path_key("frames_dir", c.frames_dir);
  path_key("diar_dir", c.diar_dir);
  if (j.contains("work_dir")) c.work_dir = resolve(get_as<std::string>(j, "work_dir"), base);
  if (j.contains("date_from")) c.date_from = get_date(j, "date_from");
  if (j.contains("date_to")) c.date_to = get_date(j, "date_to");
  if (j.contains("language")) c.language = get_as<std::string>(j, "language");
  if (j.contains("fourgram_threshold")) c.fourgram_threshold = get_as<double>(j, "fourgram_threshold");
  if (j.contains("min_speaker_share")) c.min_speaker_share = get_as<double>(j, "min_speaker_share");
  if (j.contains("classifier")) {
    c.classifier = get_as<std::string>(j, "classifier");
    for (std::string_view prefix : {"file:", "baseline:"}) {
      if (c.classifier.starts_with(prefix)) {
        c.classifier = std::string(prefix) +
                       resolve(c.classifier.substr(prefix.size()), base).string();
      }
    }
  }
  if (j.contains("name_prob_quantile")) c.name_prob_quantile = get_as<double>(j, "name_prob_quantile");
  if (j.contains("lda")) {
    const json& l = j["lda"];
    if (!l.is_object()) throw ConfigError("config: 'lda' must be an object");
    for (const auto& [key, value] : l.items()) {
      if (!kLdaKeys.contains(key)) throw ConfigError("config: unknown key 'lda." + key + "'");
    }
    if (l.contains("topics")) c.lda.topics = get_as<std::size_t>(l, "topics");
    if (l.contains("alpha") && !l["alpha"].is_null()) c.lda.alpha = get_as<double>(l, "alpha");
    if (l.contains("beta")) c.lda.beta = get_as<double>(l, "beta");
    if (l.contains("iterations")) c.lda.iterations = get_as<std::size_t>(l, "iterations");
    if (l.contains("seed")) c.lda.seed = get_as<std::uint64_t>(l, "seed");
  }
  if (j.contains("window_days")) c.window_days = get_as<std::size_t>(j, "window_days");
  if (j.contains("series_topics")) {
    c.series_topics = get_as<std::vector<std::size_t>>(j, "series_topics");
  }
  if (j.contains("share_threshold") && !j["share_threshold"].is_null()) {
    c.share_threshold = get_as<double>(j, "share_threshold");
  }
  if (j.contains("mention_phrase")) c.mention_phrase = get_as<std::string>(j, "mention_phrase");
  if (j.contains("workers")) c.workers = get_as<std::size_t>(j, "workers");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

std::string PipelineConfig::to_json() const { return config_json(*this, false).dump(2); }

std::string PipelineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_json(*this, true).dump())));
  return buf;
}

void PipelineConfig::validate(bool check_paths) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(!(date_to < date_from), "'date_from' must not be after 'date_to'");
  require(fourgram_threshold >= 0.0 && fourgram_threshold <= 1.0,
          "'fourgram_threshold' must be in [0, 1]");
  require(min_speaker_share >= 0.0 && min_speaker_share < 1.0,
          "'min_speaker_share' must be in [0, 1)");
  require(name_prob_quantile > 0.0 && name_prob_quantile <= 1.0,
          "'name_prob_quantile' must be in (0, 1]");
  require(lda.topics >= 1, "'lda.topics' must be at least 1");
  require(lda.iterations >= 1, "'lda.iterations' must be at least 1");
  require(lda.beta > 0.0, "'lda.beta' must be positive");
  require(!lda.alpha || *lda.alpha > 0.0, "'lda.alpha' must be positive");
  require(window_days >= 1, "'window_days' must be at least 1");
  require(workers >= 1, "'workers' must be at least 1");
  require(!share_threshold || (*share_threshold >= 0.0 && *share_threshold <= 1.0),
          "'share_threshold' must be in [0, 1]");
  require(!text::normalize_words(mention_phrase).empty(), "'mention_phrase' has no words");
  require(classifier == "baseline" || classifier.starts_with("baseline:") ||
              classifier.starts_with("file:"),
          "'classifier' must be baseline, baseline:<cue json> or file:<predictions csv>");
  require(!work_dir.empty(), "'work_dir' is required");
  if (!check_paths) return;
  require(!manifest.empty() && fs::is_regular_file(manifest),
          "'manifest' does not name a file: " + manifest.string());
  require(!transcripts_dir.empty() && fs::is_directory(transcripts_dir),
          "'transcripts_dir' does not name a directory: " + transcripts_dir.string());
  require(!diar_dir.empty() && fs::is_directory(diar_dir),
          "'diar_dir' does not name a directory: " + diar_dir.string());
  require(frames_dir.empty() || fs::is_directory(frames_dir),
          "'frames_dir' does not name a directory: " + frames_dir.string());
  for (std::string_view prefix : {"file:", "baseline:"}) {
    if (classifier.starts_with(prefix)) {
      fs::path p = classifier.substr(prefix.size());
      require(fs::is_regular_file(p), "classifier file not found: " + p.string());
    }
  }
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Clean: return "clean";
    case Stage::Turns: return "turns";
    case Stage::Roles: return "roles";
    case Stage::Network: return "network";
    case Stage::Topics: return "topics";
    case Stage::Series: return "series";
    case Stage::Report: break;
  }
  return "report";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : all_stages()) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::Ingest, Stage::Clean,  Stage::Turns,
                                            Stage::Roles,  Stage::Network, Stage::Topics,
                                            Stage::Series, Stage::Report};
  return stages;
}

std::optional<Stage> upstream(Stage stage) noexcept {
  switch (stage) {
    case Stage::Ingest: return std::nullopt;
    case Stage::Clean: return Stage::Ingest;
    case Stage::Turns: return Stage::Clean;
    case Stage::Roles: return Stage::Turns;
    case Stage::Network: return Stage::Roles;
    case Stage::Topics: return Stage::Roles;
    case Stage::Series: return Stage::Topics;
    case Stage::Report: break;
  }
  return Stage::Roles;
}

fs::path stage_dir(const PipelineConfig& config, Stage stage) {
  return config.work_dir / std::string(to_string(stage));
}

std::string episode_file_stem(std::string_view episode_id) {
  std::string out;
  out.reserve(episode_id.size());
  for (char c : episode_id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

bool RunManifest::ok() const noexcept {
  return std::all_of(stages.begin(), stages.end(),
                     [](const StageManifest& s) { return s.conserved(); });
}

std::string manifest_to_json(const StageManifest& m) {
  ordered_json j;
  j["stage"] = std::string(to_string(m.stage));
  j["config_hash"] = m.config_hash;
  j["input"] = m.input;
  j["retained"] = m.retained;
  j["rejected"] = m.rejected;
  j["conserved"] = m.conserved();
  j["seconds"] = m.seconds;
  ordered_json stats = ordered_json::object();
  for (const auto& [k, v] : m.stats) stats[k] = v;
  j["stats"] = stats;
  j["outputs"] = m.outputs;
  return j.dump(2);
}

std::string run_manifest_to_json(const RunManifest& m) {
  ordered_json j;
  j["config_hash"] = m.config_hash;
  j["ok"] = m.ok();
  j["stages"] = ordered_json::array();
  for (const auto& s : m.stages) j["stages"].push_back(ordered_json::parse(manifest_to_json(s)));
  return j.dump(2);
}

StageManifest read_stage_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
    StageManifest m;
    m.stage = parse_stage(j.at("stage").get<std::string>());
    m.config_hash = j.at("config_hash").get<std::string>();
    m.input = j.at("input").get<std::size_t>();
    m.retained = j.at("retained").get<std::size_t>();
    m.rejected = j.at("rejected").get<std::size_t>();
    m.seconds = j.at("seconds").get<double>();
    for (const auto& [k, v] : j.at("stats").items()) m.stats[k] = v.get<double>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": bad stage manifest: " + e.what());
  }
}

StageManifest run_stage(Stage stage, const PipelineConfig& config) {
  config.validate(stage == Stage::Ingest || stage == Stage::Clean || stage == Stage::Turns);
  const fs::path dir = stage_dir(config, stage);
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  StageOutput so;
  switch (stage) {
    case Stage::Ingest: so = stage_ingest(config, dir); break;
    case Stage::Clean: so = stage_clean(config, dir); break;
    case Stage::Turns: so = stage_turns(config, dir); break;
    case Stage::Roles: so = stage_roles(config, dir); break;
    case Stage::Network: so = stage_network(config, dir); break;
    case Stage::Topics: so = stage_topics(config, dir); break;
    case Stage::Series: so = stage_series(config, dir); break;
    case Stage::Report: so = stage_report(config, dir); break;
  }
  so.manifest.stage = stage;
  so.manifest.config_hash = config.hash();
  so.manifest.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_rejects(dir / "rejects.jsonl", so.rejects);
  so.manifest.outputs.push_back("rejects.jsonl");
  auto out = open_out(dir / "manifest.json");
  out << manifest_to_json(so.manifest) << '\n';
  return so.manifest;
}

RunManifest run_pipeline(const PipelineConfig& config, Stage from) {
  config.validate(from == Stage::Ingest || from == Stage::Clean || from == Stage::Turns);
  RunManifest run;
  run.config_hash = config.hash();
  bool started = false;
  for (Stage s : all_stages()) {
    started = started || s == from;
    if (started) run.stages.push_back(run_stage(s, config));
  }
  auto out = open_out(config.work_dir / "run_manifest.json");
  out << run_manifest_to_json(run) << '\n';
  return run;
}

}  // namespace podcorpus::pipeline
