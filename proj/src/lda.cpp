#include "podcorpus/lda.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

namespace podcorpus::topics {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) {
    auto k = static_cast<std::size_t>((*this)() * static_cast<double>(n));
    return std::min(k, n - 1);
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::string> drop_stopwords(std::vector<std::string> words) {
  if (words.size() > kPrefixWords) words.resize(kPrefixWords);
  std::erase_if(words, [](const std::string& w) { return text::is_stopword(w); });
  return words;
}

std::size_t sample(std::vector<double>& cumulative, Uniform& rng) {
  const double u = rng() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::optional<std::uint32_t> Vocabulary::id(std::string_view word, bool grow) {
  if (auto found = find(word)) return found;
  if (!grow) return std::nullopt;
  auto next = static_cast<std::uint32_t>(words_.size());
  words_.emplace_back(word);
  index_.emplace(words_.back(), next);
  return next;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  Vocabulary v;
  for (auto& w : words) {
    if (!v.id(w, true)) throw std::logic_error("vocabulary insert failed");
  }
  if (v.size() != words.size()) throw SchemaError("vocabulary contains duplicate words");
  return v;
}

std::vector<std::string> preprocess_text(std::string_view transcript) {
  return drop_stopwords(text::normalize_words(transcript));
}

std::vector<std::string> preprocess_words(std::span<const WordRecord> words) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    for (auto& piece : text::normalize_words(w.token)) {
      out.push_back(std::move(piece));
      if (out.size() == kPrefixWords) return drop_stopwords(std::move(out));
    }
  }
  return drop_stopwords(std::move(out));
}

std::vector<std::uint32_t> to_ids(std::span<const std::string> tokens, Vocabulary& vocab,
                                  bool grow) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = vocab.id(t, grow)) ids.push_back(*id);
  }
  return ids;
}

std::vector<double> theta_from_counts(std::span<const std::uint32_t> counts, double alpha) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double denom = total + static_cast<double>(counts.size()) * alpha;
  std::vector<double> theta(counts.size());
  if (!(denom > 0.0)) {
    std::fill(theta.begin(), theta.end(), 1.0 / static_cast<double>(counts.size()));
    return theta;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    theta[k] = (static_cast<double>(counts[k]) + alpha) / denom;
  }
  return theta;
}

std::vector<double> TopicModel::theta(std::size_t doc) const {
  return theta_from_counts(doc_counts(doc), alpha);
}

std::vector<double> TopicModel::phi(std::size_t topic) const {
  std::vector<double> out(vocab_size);
  const double denom = static_cast<double>(topic_totals[topic]) +
                       static_cast<double>(vocab_size) * beta;
  for (std::size_t w = 0; w < vocab_size; ++w) {
    out[w] = (static_cast<double>(count(topic, w)) + beta) / denom;
  }
  return out;
}

TopicModel fit_lda(const Corpus& corpus, std::size_t vocab_size, const LdaConfig& config,
                   const IterationObserver& observer) {
  if (corpus.empty()) throw std::invalid_argument("fit_lda: empty corpus");
  if (config.topics == 0) throw std::invalid_argument("fit_lda: need at least one topic");
  if (config.iterations == 0) throw std::invalid_argument("fit_lda: need at least one iteration");
  std::size_t tokens = 0;
  for (const auto& doc : corpus) {
    tokens += doc.size();
    for (auto w : doc) {
      if (w >= vocab_size) throw std::invalid_argument("fit_lda: word id out of range");
    }
  }
  if (config.topics > tokens) {
    throw std::invalid_argument("fit_lda: more topics (" + std::to_string(config.topics) +
                                ") than tokens (" + std::to_string(tokens) + ")");
  }

  const std::size_t K = config.topics;
  TopicModel m;
  m.topics = K;
  m.vocab_size = vocab_size;
  m.alpha = config.effective_alpha();
  m.beta = config.beta;
  m.seed = config.seed;
  m.iterations = config.iterations;
  m.topic_word.assign(K * vocab_size, 0);
  m.topic_totals.assign(K, 0);
  m.doc_topic.assign(corpus.size() * K, 0);
  m.doc_lengths.resize(corpus.size());
  m.assignments.resize(corpus.size());

  Uniform rng(config.seed);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    m.doc_lengths[d] = static_cast<std::uint32_t>(corpus[d].size());
    m.assignments[d].resize(corpus[d].size());
    for (std::size_t i = 0; i < corpus[d].size(); ++i) {
      auto k = static_cast<std::uint32_t>(rng.below(K));
      m.assignments[d][i] = k;
      ++m.topic_word[k * vocab_size + corpus[d][i]];
      ++m.topic_totals[k];
      ++m.doc_topic[d * K + k];
    }
  }

  const double v_beta = static_cast<double>(vocab_size) * m.beta;
  std::vector<double> cumulative(K);
  for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      std::uint32_t* dt = &m.doc_topic[d * K];
      for (std::size_t i = 0; i < corpus[d].size(); ++i) {
        const std::uint32_t w = corpus[d][i];
        std::uint32_t k = m.assignments[d][i];
        --m.topic_word[k * vocab_size + w];
        --m.topic_totals[k];
        --dt[k];

        double acc = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          acc += (dt[t] + m.alpha) * (m.topic_word[t * vocab_size + w] + m.beta) /
                 (m.topic_totals[t] + v_beta);
          cumulative[t] = acc;
        }
        k = static_cast<std::uint32_t>(sample(cumulative, rng));

        m.assignments[d][i] = k;
        ++m.topic_word[k * vocab_size + w];
        ++m.topic_totals[k];
        ++dt[k];
      }
    }
    if (observer) observer(iter, m);
  }
  return m;
}

InferredTopics infer_theta(std::span<const std::uint32_t> document, const TopicModel& model,
                           double alpha, std::size_t iterations, std::uint64_t seed) {
  const std::size_t K = model.topics;
  InferredTopics out;
  std::vector<std::uint32_t> doc;
  for (auto w : document) {
    if (w < model.vocab_size) doc.push_back(w);
  }
  if (doc.empty()) {
    out.theta.assign(K, 1.0 / static_cast<double>(K));
    out.empty_document = true;
    return out;
  }

  Uniform rng(seed);
  std::vector<std::uint32_t> counts(K, 0);
  std::vector<std::uint32_t> z(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(rng.below(K));
    ++counts[z[i]];
  }
  const double v_beta = static_cast<double>(model.vocab_size) * model.beta;
  std::vector<double> cumulative(K);
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      --counts[z[i]];
      double acc = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        acc += (counts[t] + alpha) * (model.count(t, doc[i]) + model.beta) /
               (model.topic_totals[t] + v_beta);
        cumulative[t] = acc;
      }
      z[i] = static_cast<std::uint32_t>(sample(cumulative, rng));
      ++counts[z[i]];
    }
  }
  out.theta = theta_from_counts(counts, alpha);
  return out;
}

std::vector<std::string> top_words(const TopicModel& model, const Vocabulary& vocab,
                                   std::size_t topic, std::size_t n) {
  if (topic >= model.topics) throw std::out_of_range("top_words: topic out of range");
  std::vector<std::uint32_t> ids(model.vocab_size);
  std::iota(ids.begin(), ids.end(), 0);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    const auto ca = model.count(topic, a);
    const auto cb = model.count(topic, b);
    if (ca != cb) return ca > cb;
    return vocab.word(a) < vocab.word(b);
  };
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), before);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocab.word(ids[i]));
  return out;
}

void write_topic_word_csv(const std::filesystem::path& path, const TopicModel& model) {
  auto out = open_out(path);
  csv::write_row(out, {"topic", "word_id", "count"});
  for (std::size_t k = 0; k < model.topics; ++k) {
    for (std::size_t w = 0; w < model.vocab_size; ++w) {
      if (auto c = model.count(k, w); c > 0) {
        out << k << ',' << w << ',' << c << '\n';
      }
    }
  }
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto out = open_out(path);
  for (const auto& w : vocab.words()) out << w << '\n';
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) words.push_back(line);
  return Vocabulary::from_words(std::move(words));
}

void write_theta_csv(const std::filesystem::path& path, std::span<const EpisodeTopics> topics) {
  auto out = open_out(path);
  const std::size_t K = topics.empty() ? 0 : topics.front().theta.size();
  csv::Row header{"episode_id"};
  for (std::size_t k = 0; k < K; ++k) header.push_back("topic_" + std::to_string(k));
  csv::write_row(out, header);
  char buf[40];
  for (const auto& t : topics) {
    out << csv::escape(t.episode_id);
    for (double v : t.theta) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::vector<EpisodeTopics> read_theta_csv(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  std::vector<EpisodeTopics> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    EpisodeTopics t;
    t.episode_id = row.at(0);
    for (std::size_t c = 1; c < row.size(); ++c) {
      double v = 0.0;
      const auto& f = row[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw ParseError(path.string() + ": bad theta value on line " + std::to_string(r + 2),
                         r + 2);
      }
      t.theta.push_back(v);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace podcorpus::topics
