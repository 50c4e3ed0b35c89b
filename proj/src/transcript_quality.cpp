#include "podcorpus/transcript_quality.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "podcorpus/text.hpp"

namespace podcorpus::quality {

std::vector<std::string> fourgram_tokens(std::span<const WordRecord> words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    // A single ASR token may carry embedded spaces.
    for (const auto& piece : text::split_whitespace(w.token)) {
      std::string folded = text::fold_token(piece);
      if (!folded.empty()) out.push_back(std::move(folded));
    }
  }
  return out;
}

RepetitionScore fourgram_repetition_score(std::span<const std::string> tokens) {
  RepetitionScore score;
  if (tokens.size() < 4) return score;
  score.total_fourgrams = tokens.size() - 3;

  std::unordered_map<std::string, std::size_t> counts;
  counts.reserve(score.total_fourgrams);
  std::string key;
  for (std::size_t i = 0; i + 4 <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < 4; ++k) {
      if (k > 0) key.push_back('\x1f');
      key.append(tokens[i + k]);
    }
    std::size_t c = ++counts[key];
    score.max_fourgram_count = std::max(score.max_fourgram_count, c);
  }
  score.ratio = static_cast<double>(score.max_fourgram_count) /
                static_cast<double>(score.total_fourgrams);
  return score;
}

Decision filter_repetitive(EpisodeRecord& episode, double threshold) {
  auto tokens = fourgram_tokens(episode.words);
  RepetitionScore score = fourgram_repetition_score(tokens);
  episode.quality.repetition = score;
  episode.quality.repetitive = score.ratio > threshold;
  return episode.quality.repetitive ? Decision::Remove : Decision::Keep;
}

TrimResult trim_hallucinated_tail(std::span<const WordRecord> words, double audio_duration_s) {
  if (!(audio_duration_s > 0.0)) {
    throw std::invalid_argument("trim_hallucinated_tail: audio duration must be positive");
  }
  TrimResult result;
  result.words.reserve(words.size());
  for (const auto& w : words) {
    if (w.start_s > audio_duration_s) {
      ++result.dropped;
    } else {
      result.words.push_back(w);
    }
  }
  return result;
}

}  // namespace podcorpus::quality
