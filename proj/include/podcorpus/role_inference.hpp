#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::roles {

// Transcript mentions must fall inside the first 350 words.
inline constexpr std::size_t kTranscriptWindowWords = 350;
// Classifier context on each side of a mention.
inline constexpr std::size_t kContextWords = 50;

enum class MentionSource { Transcript, EpisodeDescription, PodcastDescription };
std::string_view to_string(MentionSource source) noexcept;

struct CandidateMention {
  std::string episode_id;
  std::string name;  // surface form, two tokens
  MentionSource source = MentionSource::Transcript;
  std::size_t char_offset = 0;  // into the space-joined source tokens
  std::size_t token_index = 0;  // first name token
  std::vector<std::string> left_context;
  std::vector<std::string> right_context;

  // left + name + right, space joined.
  std::string context() const;
};

// Orders mentions by source (transcript first) and then offset.
bool mention_precedes(const CandidateMention& a, const CandidateMention& b) noexcept;

// Two-token capitalized name spans with honorifics/titles stripped and
// non-person words excluded. Transcript mentions come from the first 350
// words; descriptions are scanned in full. One entry per occurrence.
std::vector<CandidateMention> extract_candidates(const EpisodeRecord& episode);

// Precomputed entity span from an external NER system, in source tokens.
struct EntitySpan {
  MentionSource source = MentionSource::Transcript;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // exclusive
};

// Builds mentions from external spans, keeping only two-token spans (and,
// for the transcript, those inside the first 350 words).
std::vector<CandidateMention> candidates_from_spans(const EpisodeRecord& episode,
                                                    std::span<const EntitySpan> spans);

// Tokens of each mention source as used for offsets and context.
std::vector<std::string> source_tokens(const EpisodeRecord& episode, MentionSource source);

struct Prediction {
  RoleLabel label = RoleLabel::Neither;
  double confidence = 0.0;
};

class RoleClassifier {
 public:
  virtual ~RoleClassifier() = default;
  virtual Prediction classify(const CandidateMention& mention) const = 0;
};

struct CueRule {
  // Pattern tokens; exactly one "<name>" placeholder, "*" matches a short gap.
  std::string pattern;
  RoleLabel label = RoleLabel::Neither;
  bool direct = true;
};

struct CueConfig {
  std::vector<CueRule> rules;
  double direct_confidence = 0.9;
  double weak_confidence = 0.6;
  double default_confidence = 0.5;
  std::size_t max_gap = 4;

  static CueConfig defaults();
  // JSON: {"direct_confidence":..,"weak_confidence":..,"default_confidence":..,
  //        "max_gap":..,"rules":[{"pattern":..,"label":..,"strength":"direct|weak"}]}
  static CueConfig load(const std::filesystem::path& path);
};

// First matching cue rule decides; no match yields Neither at the default
// confidence.
class CuePhraseClassifier final : public RoleClassifier {
 public:
  explicit CuePhraseClassifier(CueConfig config = CueConfig::defaults());
  Prediction classify(const CandidateMention& mention) const override;

 private:
  struct Compiled {
    std::vector<std::string> left;   // tokens before <name>, in order
    std::vector<std::string> right;  // tokens after <name>
    RoleLabel label;
    double confidence;
  };
  CueConfig config_;
  std::vector<Compiled> compiled_;
};

// Replays precomputed predictions keyed by (episode_id, name). Mentions not
// in the table are (Neither, 0).
class FileClassifier final : public RoleClassifier {
 public:
  // CSV columns: episode_id,name,label,confidence.
  static FileClassifier load(const std::filesystem::path& path);
  void add(std::string_view episode_id, std::string_view name, Prediction p);
  Prediction classify(const CandidateMention& mention) const override;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::unordered_map<std::string, Prediction> table_;
};

// "baseline", "file:<path>" or "baseline:<cue-config.json>".
std::unique_ptr<RoleClassifier> make_classifier(std::string_view setting);

struct ScoredMention {
  CandidateMention mention;
  Prediction prediction;
};

// Maximum-confidence prediction for one name; ties go to the earliest
// mention. Throws std::invalid_argument on empty input.
RoleAssignment aggregate_mentions(std::span<const ScoredMention> predictions);

// Extract, classify and aggregate per (case-insensitive) name. Output is in
// order of each name's earliest mention.
std::vector<RoleAssignment> infer_roles(const EpisodeRecord& episode,
                                        const RoleClassifier& classifier,
                                        std::vector<ScoredMention>* mentions = nullptr);

// Label matrix: rows are items, columns coders; nullopt marks missing.
using AnnotationMatrix = std::vector<std::vector<std::optional<std::string>>>;

// Nominal Krippendorff's alpha via the coincidence matrix. Throws
// std::invalid_argument when no item has two labels or expected
// disagreement is zero.
double krippendorff_alpha(const AnnotationMatrix& annotations);

struct EpisodeRoleSet {
  std::string episode_id;
  std::string category;
  std::vector<RoleAssignment> roles;
};

struct EpisodeRoleCounts {
  std::string episode_id;
  std::string category;
  std::size_t host_count = 0;
  std::size_t guest_count = 0;
};

struct CategoryRoleSummary {
  std::string category;
  std::size_t episodes = 0;
  std::size_t episodes_with_host = 0;
  std::map<std::size_t, std::size_t> host_histogram;
  std::map<std::size_t, std::size_t> guest_histogram;
  // Over episodes with at least one host; absent when there are none.
  std::optional<double> host_mean;
  double guest_mean = 0.0;
};

struct RoleCountSummary {
  std::vector<EpisodeRoleCounts> episodes;
  std::vector<CategoryRoleSummary> categories;  // sorted by category
  CategoryRoleSummary overall;                  // category "all"
};

RoleCountSummary role_count_summary(std::span<const EpisodeRoleSet> episodes);

}  // namespace podcorpus::roles
