#pragma once

#include <span>
#include <string>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::quality {

inline constexpr double kDefaultFourgramThreshold = 0.05;

// Lowercased, punctuation-stripped tokens; tokens that strip to nothing are
// dropped. Non-speech tags such as "[MUSIC]" survive as ordinary tokens.
std::vector<std::string> fourgram_tokens(std::span<const WordRecord> words);

RepetitionScore fourgram_repetition_score(std::span<const std::string> tokens);

enum class Decision { Keep, Remove };

// Scores the episode transcript and records the score and decision on the
// record. Removal requires ratio strictly above `threshold`.
Decision filter_repetitive(EpisodeRecord& episode,
                           double threshold = kDefaultFourgramThreshold);

struct TrimResult {
  std::vector<WordRecord> words;
  std::size_t dropped = 0;
};

// Drops words that start after the end of the audio. Throws
// std::invalid_argument unless audio_duration_s > 0.
TrimResult trim_hallucinated_tail(std::span<const WordRecord> words, double audio_duration_s);

}  // namespace podcorpus::quality
