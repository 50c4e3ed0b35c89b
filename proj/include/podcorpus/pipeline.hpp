#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::pipeline {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct LdaSettings {
  std::size_t topics = 200;
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 7;
};

struct PipelineConfig {
  std::filesystem::path manifest;         // feed manifest CSV
  std::filesystem::path transcripts_dir;  // <stem>.words.jsonl
  std::filesystem::path frames_dir;       // <stem>.frames.csv
  std::filesystem::path diar_dir;         // <stem>.diar.csv
  std::filesystem::path work_dir = "work";

  Date date_from{2020, 1, 1};
  Date date_to{2020, 12, 31};
  std::string language = "en";
  double fourgram_threshold = 0.05;
  double min_speaker_share = 0.05;
  std::string classifier = "baseline";
  double name_prob_quantile = 0.5;
  LdaSettings lda;
  std::size_t window_days = 3;
  std::vector<std::size_t> series_topics;
  std::optional<double> share_threshold;
  std::string mention_phrase = "george floyd";
  std::size_t workers = 1;

  // Relative paths resolve against `base`.
  static PipelineConfig from_json(std::string_view json_text,
                                  const std::filesystem::path& base = {});
  static PipelineConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  // Throws ConfigError naming the first offending key.
  void validate(bool check_paths = true) const;
  // FNV-1a 64 of the canonical JSON, excluding the worker count.
  std::string hash() const;
};

enum class Stage { Ingest, Clean, Turns, Roles, Network, Topics, Series, Report };

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();
// Stage whose output this stage reads; nullopt for ingest.
std::optional<Stage> upstream(Stage stage) noexcept;

std::filesystem::path stage_dir(const PipelineConfig& config, Stage stage);
// Filesystem-safe stem for an episode id.
std::string episode_file_stem(std::string_view episode_id);

struct Reject {
  std::string episode_id;
  std::string podcast_id;
  std::string reason;
};

struct StageManifest {
  Stage stage = Stage::Ingest;
  std::size_t input = 0;
  std::size_t retained = 0;
  std::size_t rejected = 0;
  double seconds = 0.0;
  std::string config_hash;
  std::map<std::string, double> stats;
  std::vector<std::string> outputs;  // file names inside the stage directory

  bool conserved() const noexcept { return input == retained + rejected; }
};

struct RunManifest {
  std::string config_hash;
  std::vector<StageManifest> stages;
  bool ok() const noexcept;
};

// Runs one stage from its predecessor's output and writes
// <work_dir>/<stage>/manifest.json. Throws Error naming the stage when the
// upstream output is missing.
StageManifest run_stage(Stage stage, const PipelineConfig& config);

// Runs stages in dependency order starting at `from`.
RunManifest run_pipeline(const PipelineConfig& config, Stage from = Stage::Ingest);

std::string manifest_to_json(const StageManifest& manifest);
std::string run_manifest_to_json(const RunManifest& manifest);
StageManifest read_stage_manifest(const std::filesystem::path& path);

}  // namespace podcorpus::pipeline
