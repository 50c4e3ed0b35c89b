#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::turns {

inline constexpr double kFrameLength = 0.1;
inline constexpr double kDefaultMinSpeakerShare = 0.05;
// Overlap durations closer than this are ties.
inline constexpr double kOverlapTolerance = 1e-9;

struct ProsodicFrame {
  double window_start_s = 0.0;
  double window_end_s = 0.0;
  double f0 = 0.0;
  double f1 = 0.0;
  Mfcc mfcc{};
};

struct DiarizationSegment {
  std::string speaker;
  double start_s = 0.0;
  double end_s = 0.0;
};

// Index of the word each frame is assigned to, or nullopt when the frame
// overlaps no word. Ties on overlap go to the earlier word.
std::vector<std::optional<std::size_t>> assign_frames(std::span<const WordRecord> words,
                                                      std::span<const ProsodicFrame> frames);

// Copies `words` with per-word prosodic means over their assigned frames.
// Words with no frames get all prosody fields cleared.
std::vector<WordRecord> align_prosody(std::span<const WordRecord> words,
                                      std::span<const ProsodicFrame> frames);

// Labels each word with a speaker. Time covered by several concurrent
// segments is credited to the segment that started first; the word goes to
// the speaker with the most credited time.
std::vector<WordRecord> assign_speakers(std::span<const WordRecord> words,
                                        std::span<const DiarizationSegment> segments);

struct SpeakerFilterResult {
  std::vector<WordRecord> words;
  std::vector<std::string> retained;  // sorted labels
  std::vector<std::string> removed;   // sorted labels
};

// Clears labels of speakers whose share of labeled speaking time is below
// `min_share`. Speaking time is the summed duration of each speaker's words.
SpeakerFilterResult filter_minor_speakers(std::span<const WordRecord> words,
                                          double min_share = kDefaultMinSpeakerShare);

// Maximal runs of same-speaker labeled words. Unlabeled words belong to no
// turn and do not break a run.
std::vector<Turn> segment_turns(std::span<const WordRecord> words);

// Speaker of the earliest turn whose text contains `host_name` as two
// adjacent tokens, ignoring case and punctuation.
std::optional<std::string> map_host_voice(std::span<const Turn> turns,
                                          std::string_view host_name);

// CSV readers for the per-episode input files.
// Frames: window_start_s,f0,f1,mfcc1,mfcc2,mfcc3,mfcc4 (window_end_s optional).
std::vector<ProsodicFrame> read_frames_csv(const std::filesystem::path& path);
// Segments: speaker,start_s,end_s.
std::vector<DiarizationSegment> read_segments_csv(const std::filesystem::path& path);
// Word transcript: one {"token","start_s","end_s"} object per line.
std::vector<WordRecord> read_words_jsonl(const std::filesystem::path& path);

}  // namespace podcorpus::turns
