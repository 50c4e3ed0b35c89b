#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::topics {

// Topic modeling sees only the start of each transcript.
inline constexpr std::size_t kPrefixWords = 1000;

class Vocabulary {
 public:
  // Id of `word`, adding it when `grow` is set. Returns nullopt for unknown
  // words otherwise.
  std::optional<std::uint32_t> id(std::string_view word, bool grow);
  std::optional<std::uint32_t> find(std::string_view word) const;
  const std::string& word(std::uint32_t id) const { return words_.at(id); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  static Vocabulary from_words(std::vector<std::string> words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Normalized, stopword-free tokens drawn from the first kPrefixWords
// normalized words.
std::vector<std::string> preprocess_text(std::string_view transcript);
std::vector<std::string> preprocess_words(std::span<const WordRecord> words);

// Maps tokens to ids; unknown tokens are added (grow) or dropped.
std::vector<std::uint32_t> to_ids(std::span<const std::string> tokens, Vocabulary& vocab,
                                  bool grow);

using Document = std::vector<std::uint32_t>;
using Corpus = std::vector<Document>;

struct LdaConfig {
  std::size_t topics = 200;
  std::optional<double> alpha;  // default 50 / topics
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 7;

  double effective_alpha() const { return alpha.value_or(50.0 / static_cast<double>(topics)); }
};

struct TopicModel {
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;

  std::vector<std::uint32_t> topic_word;   // topics x vocab_size
  std::vector<std::uint32_t> topic_totals; // per topic
  std::vector<std::uint32_t> doc_topic;    // documents x topics
  std::vector<std::uint32_t> doc_lengths;
  std::vector<std::vector<std::uint32_t>> assignments;  // topic per token

  std::size_t documents() const noexcept { return doc_lengths.size(); }
  std::uint32_t count(std::size_t topic, std::size_t word) const {
    return topic_word[topic * vocab_size + word];
  }
  std::span<const std::uint32_t> doc_counts(std::size_t doc) const {
    return std::span(doc_topic).subspan(doc * topics, topics);
  }
  // Smoothed topic proportions of a training document.
  std::vector<double> theta(std::size_t doc) const;
  // Smoothed word distribution of a topic.
  std::vector<double> phi(std::size_t topic) const;
};

// Called after every sweep with the 1-based iteration number.
using IterationObserver = std::function<void(std::size_t, const TopicModel&)>;

// Collapsed Gibbs sampling. Throws std::invalid_argument on an empty corpus,
// topics == 0, iterations == 0, out-of-range word ids or topics > tokens.
TopicModel fit_lda(const Corpus& corpus, std::size_t vocab_size, const LdaConfig& config,
                   const IterationObserver& observer = {});

// (count_k + alpha) / (N + K alpha).
std::vector<double> theta_from_counts(std::span<const std::uint32_t> counts, double alpha);

struct InferredTopics {
  std::vector<double> theta;
  bool empty_document = false;
};

// Folds an unseen document into a fitted model by Gibbs sampling its topic
// assignments against fixed topic-word counts. Empty documents get the
// uniform distribution and are flagged.
InferredTopics infer_theta(std::span<const std::uint32_t> document, const TopicModel& model,
                           double alpha, std::size_t iterations = 50, std::uint64_t seed = 7);

// Highest-count words of a topic; ties alphabetical. n is clamped to V.
std::vector<std::string> top_words(const TopicModel& model, const Vocabulary& vocab,
                                   std::size_t topic, std::size_t n);

// Sparse triplets topic,word_id,count (non-zero cells only).
void write_topic_word_csv(const std::filesystem::path& path, const TopicModel& model);
void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);
// episode_id,topic_0,...,topic_{K-1}
void write_theta_csv(const std::filesystem::path& path, std::span<const EpisodeTopics> topics);
std::vector<EpisodeTopics> read_theta_csv(const std::filesystem::path& path);

}  // namespace podcorpus::topics
