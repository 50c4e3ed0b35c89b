#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::analytics {

inline constexpr std::size_t kDefaultWindowDays = 3;

struct SeriesPoint {
  Date date;
  std::optional<double> value;  // absent on days without episodes
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n = 0;   // episodes on this day
  bool wide = false;   // CI is the full admissible range (n = 1)
};

// One point per calendar day from the first to the last observed date.
struct TimeSeries {
  std::vector<SeriesPoint> points;
};

// Trailing mean over the last `window` entries (t-window+1..t) that are
// present. Entry t is absent when input t is absent.
std::vector<std::optional<double>> rolling_mean(std::span<const std::optional<double>> values,
                                                std::size_t window);

// Two-sided 95% half-width of a mean with the t distribution (n >= 2).
double t_half_width(double sd, std::size_t n);
// 97.5% standard normal quantile.
double z975();

struct Interval {
  double low;
  double high;
};

// Mean with t-based 95% CI clamped to [lo, hi]; n == 1 yields [lo, hi].
struct MeanEstimate {
  double mean = 0.0;
  Interval ci{0.0, 0.0};
  std::size_t n = 0;
  bool wide = false;
};
MeanEstimate mean_with_ci(std::span<const double> values, double lo, double hi);

// Normal-approximation 95% CI of a proportion k/n, clamped to [0,1].
Interval proportion_ci(std::size_t k, std::size_t n);

struct TopicObservation {
  Date date;
  std::string category;
  std::vector<double> theta;
};

struct TopicSeriesOptions {
  std::size_t window = kDefaultWindowDays;
  std::optional<std::string> category;
  // When set, an episode counts as on-topic iff its topic mass reaches this
  // threshold and the series is the percentage of on-topic episodes.
  std::optional<double> share_threshold;
};

// Daily value: mean over the day's episodes of the theta mass on `topic_ids`,
// as a percentage; then trailing rolling mean of values and CI bounds.
TimeSeries topic_timeseries(std::span<const TopicObservation> episodes,
                            std::span<const std::size_t> topic_ids,
                            const TopicSeriesOptions& options = {});

struct MentionObservation {
  Date date;
  std::string podcast_id;
  std::string category;
  bool mentions = false;
};

// Contiguous token match over normalized tokens.
bool contains_phrase(std::span<const std::string> normalized_tokens,
                     std::span<const std::string> phrase_tokens);
// Normalizes transcript words and phrase then checks containment.
bool transcript_mentions(std::span<const WordRecord> words, std::string_view phrase);

// Daily percentage of episodes that mention the phrase, rolled like
// topic_timeseries, with normal-approximation CIs.
TimeSeries mention_rate(std::span<const MentionObservation> episodes,
                        std::size_t window = kDefaultWindowDays,
                        const std::optional<std::string>& category = std::nullopt);

// Fraction of podcasts with at least one mentioning episode. Throws
// std::invalid_argument on an empty input.
double show_mention_share(std::span<const MentionObservation> episodes);

enum class Feature { F0, F1, Mfcc1, Mfcc2, Mfcc3, Mfcc4 };
std::string_view to_string(Feature f) noexcept;
Feature parse_feature(std::string_view name);

// Mean of the feature over the episode's words with prosody.
std::optional<double> episode_feature_mean(const EpisodeRecord& episode, Feature feature);

struct FeatureRow {
  std::string category;
  std::size_t episodes = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct FeatureSummary {
  std::vector<FeatureRow> rows;  // sorted by category
  std::vector<std::string> notes;
};

// Per category: mean of episode-level feature means with a t-based 95% CI.
// Categories without prosodic data are omitted and noted.
FeatureSummary category_feature_summary(std::span<const EpisodeRecord> episodes,
                                        Feature feature);

// Descriptive corpus tables.
struct EcdfRow {
  std::int64_t duration_s;
  double cumulative_fraction;
};
std::vector<EcdfRow> duration_ecdf(std::vector<std::int64_t> durations);
std::map<std::string, std::size_t> category_counts(std::span<const EpisodeRecord> episodes);
// Distinct podcasts per hosting platform.
std::map<std::string, std::size_t> platform_counts(std::span<const EpisodeRecord> episodes);

// date,value,ci_low,ci_high,n,wide; absent values are empty cells.
void write_series_csv(const std::filesystem::path& path, const TimeSeries& series);

// Fixed 10 significant digits, for reproducible CSV output.
std::string format_number(double v);

}  // namespace podcorpus::analytics
