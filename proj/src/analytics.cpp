#include "podcorpus/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

namespace podcorpus::analytics {

namespace {

struct Daily {
  std::optional<double> value;
  std::optional<double> low;
  std::optional<double> high;
  std::size_t n = 0;
  bool wide = false;
};

template <class Estimator>
TimeSeries build_series(const std::map<Date, std::vector<double>>& by_day, std::size_t window,
                        Estimator estimate) {
  if (window == 0) throw std::invalid_argument("rolling window must be at least one day");
  TimeSeries series;
  if (by_day.empty()) return series;
  const std::int64_t first = by_day.begin()->first.to_days();
  const std::int64_t last = by_day.rbegin()->first.to_days();

  std::vector<Daily> days;
  days.reserve(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t d = first; d <= last; ++d) {
    Daily day;
    auto it = by_day.find(Date::from_days(d));
    if (it != by_day.end() && !it->second.empty()) day = estimate(it->second);
    days.push_back(day);
  }

  auto column = [&](auto member) {
    std::vector<std::optional<double>> col;
    col.reserve(days.size());
    for (const auto& d : days) col.push_back(d.*member);
    return rolling_mean(col, window);
  };
  auto value = column(&Daily::value);
  auto low = column(&Daily::low);
  auto high = column(&Daily::high);

  for (std::size_t i = 0; i < days.size(); ++i) {
    SeriesPoint p;
    p.date = Date::from_days(first + static_cast<std::int64_t>(i));
    p.value = value[i];
    p.ci_low = low[i];
    p.ci_high = high[i];
    p.n = days[i].n;
    p.wide = days[i].wide;
    series.points.push_back(p);
  }
  return series;
}

Daily mean_daily(const std::vector<double>& values) {
  MeanEstimate e = mean_with_ci(values, 0.0, 100.0);
  return Daily{e.mean, e.ci.low, e.ci.high, e.n, e.wide};
}

Daily proportion_daily(const std::vector<double>& indicators) {
  const auto k = static_cast<std::size_t>(
      std::count_if(indicators.begin(), indicators.end(), [](double v) { return v > 0.5; }));
  const std::size_t n = indicators.size();
  Interval ci = proportion_ci(k, n);
  const double value = 100.0 * static_cast<double>(k) / static_cast<double>(n);
  return Daily{value, 100.0 * ci.low, 100.0 * ci.high, n, false};
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::optional<double>> rolling_mean(std::span<const std::optional<double>> values,
                                                std::size_t window) {
  if (window == 0) throw std::invalid_argument("rolling window must be at least one day");
  std::vector<std::optional<double>> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!values[t]) continue;
    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t begin = t + 1 >= window ? t + 1 - window : 0;
    for (std::size_t i = begin; i <= t; ++i) {
      if (values[i]) {
        sum += *values[i];
        ++count;
      }
    }
    out[t] = sum / static_cast<double>(count);
  }
  return out;
}

double t_half_width(double sd, std::size_t n) {
  if (n < 2) throw std::invalid_argument("t_half_width: need at least two values");
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return t * sd / std::sqrt(static_cast<double>(n));
}

double z975() {
  static const double z = boost::math::quantile(boost::math::normal(), 0.975);
  return z;
}

MeanEstimate mean_with_ci(std::span<const double> values, double lo, double hi) {
  if (values.empty()) throw std::invalid_argument("mean_with_ci: no values");
  MeanEstimate e;
  e.n = values.size();
  e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(e.n);
  if (e.n == 1) {
    e.ci = {std::min(lo, e.mean), std::max(hi, e.mean)};
    e.wide = true;
    return e;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  const double sd = std::sqrt(ss / static_cast<double>(e.n - 1));
  const double half = t_half_width(sd, e.n);
  e.ci.low = std::min(e.mean, std::max(lo, e.mean - half));
  e.ci.high = std::max(e.mean, std::min(hi, e.mean + half));
  return e;
}

Interval proportion_ci(std::size_t k, std::size_t n) {
  if (n == 0 || k > n) throw std::invalid_argument("proportion_ci: need 0 <= k <= n, n > 0");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double half = z975() * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return Interval{std::max(0.0, p - half), std::min(1.0, p + half)};
}

TimeSeries topic_timeseries(std::span<const TopicObservation> episodes,
                            std::span<const std::size_t> topic_ids,
                            const TopicSeriesOptions& options) {
  std::map<Date, std::vector<double>> by_day;
  for (const auto& ep : episodes) {
    if (options.category && ep.category != *options.category) continue;
    double mass = 0.0;
    for (std::size_t k : topic_ids) {
      if (k >= ep.theta.size()) throw std::out_of_range("topic id out of range");
      mass += ep.theta[k];
    }
    if (options.share_threshold) {
      by_day[ep.date].push_back(mass >= *options.share_threshold ? 1.0 : 0.0);
    } else {
      by_day[ep.date].push_back(100.0 * mass);
    }
  }
  if (options.share_threshold) return build_series(by_day, options.window, proportion_daily);
  return build_series(by_day, options.window, mean_daily);
}

bool contains_phrase(std::span<const std::string> tokens, std::span<const std::string> phrase) {
  if (phrase.empty()) throw std::invalid_argument("contains_phrase: empty phrase");
  if (phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

bool transcript_mentions(std::span<const WordRecord> words, std::string_view phrase) {
  auto phrase_tokens = text::normalize_words(phrase);
  std::vector<std::string> tokens;
  tokens.reserve(words.size());
  for (const auto& w : words) {
    for (auto& t : text::normalize_words(w.token)) tokens.push_back(std::move(t));
  }
  return contains_phrase(tokens, phrase_tokens);
}

TimeSeries mention_rate(std::span<const MentionObservation> episodes, std::size_t window,
                        const std::optional<std::string>& category) {
  std::map<Date, std::vector<double>> by_day;
  for (const auto& ep : episodes) {
    if (category && ep.category != *category) continue;
    by_day[ep.date].push_back(ep.mentions ? 1.0 : 0.0);
  }
  return build_series(by_day, window, proportion_daily);
}

double show_mention_share(std::span<const MentionObservation> episodes) {
  std::set<std::string> podcasts;
  std::set<std::string> mentioning;
  for (const auto& ep : episodes) {
    podcasts.insert(ep.podcast_id);
    if (ep.mentions) mentioning.insert(ep.podcast_id);
  }
  if (podcasts.empty()) throw std::invalid_argument("show_mention_share: no podcasts");
  return static_cast<double>(mentioning.size()) / static_cast<double>(podcasts.size());
}

std::string_view to_string(Feature f) noexcept {
  switch (f) {
    case Feature::F0: return "f0";
    case Feature::F1: return "f1";
    case Feature::Mfcc1: return "mfcc1";
    case Feature::Mfcc2: return "mfcc2";
    case Feature::Mfcc3: return "mfcc3";
    case Feature::Mfcc4: break;
  }
  return "mfcc4";
}

Feature parse_feature(std::string_view name) {
  for (Feature f : {Feature::F0, Feature::F1, Feature::Mfcc1, Feature::Mfcc2, Feature::Mfcc3,
                    Feature::Mfcc4}) {
    if (text::to_lower(name) == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown prosodic feature '" + std::string(name) + "'");
}

std::optional<double> episode_feature_mean(const EpisodeRecord& episode, Feature feature) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& w : episode.words) {
    if (!w.has_prosody()) continue;
    switch (feature) {
      case Feature::F0: sum += *w.f0_mean; break;
      case Feature::F1: sum += *w.f1_mean; break;
      case Feature::Mfcc1: sum += (*w.mfcc_mean)[0]; break;
      case Feature::Mfcc2: sum += (*w.mfcc_mean)[1]; break;
      case Feature::Mfcc3: sum += (*w.mfcc_mean)[2]; break;
      case Feature::Mfcc4: sum += (*w.mfcc_mean)[3]; break;
    }
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

FeatureSummary category_feature_summary(std::span<const EpisodeRecord> episodes,
                                        Feature feature) {
  std::map<std::string, std::vector<double>> by_category;
  for (const auto& ep : episodes) {
    auto& values = by_category[ep.podcast.category];
    if (auto m = episode_feature_mean(ep, feature)) values.push_back(*m);
  }
  FeatureSummary summary;
  for (const auto& [category, values] : by_category) {
    if (values.empty()) {
      summary.notes.push_back(category + ": no prosodic data, omitted");
      continue;
    }
    const double inf = std::numeric_limits<double>::infinity();
    MeanEstimate e = mean_with_ci(values, -inf, inf);
    FeatureRow row{category, e.n, e.mean, e.ci.low, e.ci.high};
    if (e.n == 1) {
      row.ci_low = row.ci_high = e.mean;
      summary.notes.push_back(category + ": single episode, no interval");
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::vector<EcdfRow> duration_ecdf(std::vector<std::int64_t> durations) {
  std::sort(durations.begin(), durations.end());
  std::vector<EcdfRow> out;
  const double n = static_cast<double>(durations.size());
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (i + 1 < durations.size() && durations[i + 1] == durations[i]) continue;
    out.push_back(EcdfRow{durations[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

std::map<std::string, std::size_t> category_counts(std::span<const EpisodeRecord> episodes) {
  std::map<std::string, std::size_t> out;
  for (const auto& ep : episodes) ++out[ep.podcast.category];
  return out;
}

std::map<std::string, std::size_t> platform_counts(std::span<const EpisodeRecord> episodes) {
  std::map<std::string, std::set<std::string>> podcasts;
  for (const auto& ep : episodes) {
    podcasts[ep.podcast.hosting_platform.empty() ? "unknown" : ep.podcast.hosting_platform]
        .insert(ep.podcast.podcast_id);
  }
  std::map<std::string, std::size_t> out;
  for (const auto& [platform, ids] : podcasts) out[platform] = ids.size();
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
  auto out = open_out(path);
  csv::write_row(out, {"date", "value", "ci_low", "ci_high", "n", "wide"});
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& p : series.points) {
    csv::write_row(out, {p.date.to_iso(), cell(p.value), cell(p.ci_low), cell(p.ci_high),
                         std::to_string(p.n), p.wide ? "1" : "0"});
  }
}

}  // namespace podcorpus::analytics
