#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "podcorpus/pipeline.hpp"

namespace pl = podcorpus::pipeline;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> manifest, transcripts, frames, diar, work_dir;
  std::optional<std::string> from, to, lang, classifier, phrase;
  std::optional<double> fourgram, min_share, name_q, alpha, beta, share_threshold;
  std::optional<std::size_t> k, iterations, window, workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::size_t>> topics;
};

void add_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "Pipeline configuration JSON");
  app.add_option("--manifest", o.manifest, "Feed manifest CSV");
  app.add_option("--transcripts", o.transcripts, "Directory of <episode>.words.jsonl");
  app.add_option("--frames", o.frames, "Directory of <episode>.frames.csv");
  app.add_option("--diar", o.diar, "Directory of <episode>.diar.csv");
  app.add_option("--work-dir,--out", o.work_dir, "Root directory for stage outputs");
  app.add_option("--from", o.from, "First publication date (YYYY-MM-DD)");
  app.add_option("--to", o.to, "Last publication date (YYYY-MM-DD)");
  app.add_option("--lang", o.lang, "Language prefix");
  app.add_option("--fourgram-threshold", o.fourgram, "Repetition ratio above which transcripts are removed");
  app.add_option("--min-speaker-share", o.min_share, "Minimum share of words per speaker");
  app.add_option("--classifier", o.classifier, "baseline, baseline:<cues.json> or file:<predictions.csv>");
  app.add_option("--name-prob-quantile", o.name_q, "Quantile of guest name probability kept");
  app.add_option("--k", o.k, "Number of topics");
  app.add_option("--alpha", o.alpha, "Document-topic smoothing");
  app.add_option("--beta", o.beta, "Topic-word smoothing");
  app.add_option("--iterations", o.iterations, "Gibbs sweeps");
  app.add_option("--seed", o.seed, "Sampler seed");
  app.add_option("--window", o.window, "Rolling window in days");
  app.add_option("--topics", o.topics, "Topic ids for the topic series")->delimiter(',');
  app.add_option("--share-threshold", o.share_threshold,
                 "Count episodes with at least this topic mass instead of averaging theta");
  app.add_option("--phrase", o.phrase, "Phrase for the mention series");
  app.add_option("--workers", o.workers, "Worker threads");
}

pl::PipelineConfig build_config(const Overrides& o) {
  pl::PipelineConfig c = o.config.empty() ? pl::PipelineConfig{} : pl::PipelineConfig::load(o.config);
  auto date = [](const std::string& raw, const char* flag) {
    auto d = podcorpus::Date::parse_iso(raw);
    if (!d) throw pl::ConfigError(std::string(flag) + " is not a YYYY-MM-DD date");
    return *d;
  };
  if (o.manifest) c.manifest = *o.manifest;
  if (o.transcripts) c.transcripts_dir = *o.transcripts;
  if (o.frames) c.frames_dir = *o.frames;
  if (o.diar) c.diar_dir = *o.diar;
  if (o.work_dir) c.work_dir = *o.work_dir;
  if (o.from) c.date_from = date(*o.from, "--from");
  if (o.to) c.date_to = date(*o.to, "--to");
  if (o.lang) c.language = *o.lang;
  if (o.fourgram) c.fourgram_threshold = *o.fourgram;
  if (o.min_share) c.min_speaker_share = *o.min_share;
  if (o.classifier) c.classifier = *o.classifier;
  if (o.name_q) c.name_prob_quantile = *o.name_q;
  if (o.k) c.lda.topics = *o.k;
  if (o.alpha) c.lda.alpha = *o.alpha;
  if (o.beta) c.lda.beta = *o.beta;
  if (o.iterations) c.lda.iterations = *o.iterations;
  if (o.seed) c.lda.seed = *o.seed;
  if (o.window) c.window_days = *o.window;
  if (o.topics) c.series_topics = *o.topics;
  if (o.share_threshold) c.share_threshold = *o.share_threshold;
  if (o.phrase) c.mention_phrase = *o.phrase;
  if (o.workers) c.workers = *o.workers;
  return c;
}

void print(const pl::StageManifest& m) {
  std::printf("%-8s input %zu retained %zu rejected %zu%s (%.2f s)\n",
              std::string(pl::to_string(m.stage)).c_str(), m.input, m.retained, m.rejected,
              m.conserved() ? "" : " COUNT MISMATCH", m.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Podcast corpus pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  add_options(app, o);

  std::optional<pl::Stage> stage;
  std::string run_from = "ingest";
  bool show_config = false;

  for (pl::Stage s : pl::all_stages()) {
    if (s == pl::Stage::Topics) continue;
    app.add_subcommand(std::string(pl::to_string(s)), "Run the " + std::string(pl::to_string(s)) + " stage")
        ->callback([&stage, s] { stage = s; });
  }
  auto* topics = app.add_subcommand("topics", "Topic model and time series");
  topics->require_subcommand(1);
  topics->fallthrough();
  topics->add_subcommand("fit", "Fit the topic model")->callback([&] { stage = pl::Stage::Topics; });
  topics->add_subcommand("series", "Topic share time series")->callback([&] { stage = pl::Stage::Series; });
  topics->add_subcommand("mentions", "Phrase mention time series")->callback([&] { stage = pl::Stage::Series; });
  auto* run = app.add_subcommand("run", "Run all stages in order");
  run->add_option("--start", run_from, "Resume from this stage");
  app.add_subcommand("config", "Print the resolved configuration and its hash")
      ->callback([&] { show_config = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto config = build_config(o);
    if (show_config) {
      config.validate(false);
      std::cout << config.to_json() << "\nhash " << config.hash() << '\n';
      return 0;
    }
    if (stage) {
      auto m = pl::run_stage(*stage, config);
      print(m);
      return m.conserved() ? 0 : 1;
    }
    auto manifest = pl::run_pipeline(config, pl::parse_stage(run_from));
    for (const auto& m : manifest.stages) print(m);
    std::printf("config %s\n", manifest.config_hash.c_str());
    return manifest.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
