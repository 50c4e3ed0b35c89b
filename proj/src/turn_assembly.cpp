#include "podcorpus/turn_assembly.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

#include "json.hpp"

namespace podcorpus::turns {

namespace {

// prefix_max_end[i] = max(end of items[0..i]); monotone, so the first item
// that can reach past time t is found by binary search.
template <class T, class EndFn>
std::vector<double> prefix_max_end(std::span<const T> items, EndFn end_of) {
  std::vector<double> out(items.size());
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < items.size(); ++i) {
    running = std::max(running, end_of(items[i]));
    out[i] = running;
  }
  return out;
}

std::size_t first_reaching(const std::vector<double>& prefix_end, double t) {
  return static_cast<std::size_t>(
      std::partition_point(prefix_end.begin(), prefix_end.end(),
                           [t](double e) { return e <= t; }) -
      prefix_end.begin());
}

double overlap(double a0, double a1, double b0, double b1) noexcept {
  return std::min(a1, b1) - std::max(a0, b0);
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t row) {
  double v = 0.0;
  auto s = text::trim(field);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(path.string() + ": bad number '" + field + "' on line " +
                         std::to_string(row + 2),
                     row + 2);
  }
  return v;
}

}  // namespace

std::vector<std::optional<std::size_t>> assign_frames(std::span<const WordRecord> words,
                                                      std::span<const ProsodicFrame> frames) {
  auto prefix_end = prefix_max_end(words, [](const WordRecord& w) { return w.end_s; });
  std::vector<std::optional<std::size_t>> out(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    double best = 0.0;
    for (std::size_t i = first_reaching(prefix_end, frame.window_start_s);
         i < words.size() && words[i].start_s < frame.window_end_s; ++i) {
      double ov = overlap(words[i].start_s, words[i].end_s, frame.window_start_s,
                          frame.window_end_s);
      if (ov <= 0.0) continue;
      if (!out[f] || ov > best + kOverlapTolerance) {
        out[f] = i;
        best = ov;
      }
    }
  }
  return out;
}

std::vector<WordRecord> align_prosody(std::span<const WordRecord> words,
                                      std::span<const ProsodicFrame> frames) {
  struct Accum {
    std::size_t n = 0;
    double f0 = 0.0;
    double f1 = 0.0;
    Mfcc mfcc{};
  };
  std::vector<Accum> acc(words.size());
  auto assignment = assign_frames(words, frames);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!assignment[f]) continue;
    Accum& a = acc[*assignment[f]];
    ++a.n;
    a.f0 += frames[f].f0;
    a.f1 += frames[f].f1;
    for (std::size_t k = 0; k < 4; ++k) a.mfcc[k] += frames[f].mfcc[k];
  }

  std::vector<WordRecord> out(words.begin(), words.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Accum& a = acc[i];
    if (a.n == 0) {
      out[i].f0_mean.reset();
      out[i].f1_mean.reset();
      out[i].mfcc_mean.reset();
      continue;
    }
    const double n = static_cast<double>(a.n);
    out[i].f0_mean = a.f0 / n;
    out[i].f1_mean = a.f1 / n;
    Mfcc m{};
    for (std::size_t k = 0; k < 4; ++k) m[k] = a.mfcc[k] / n;
    out[i].mfcc_mean = m;
  }
  return out;
}

std::vector<WordRecord> assign_speakers(std::span<const WordRecord> words,
                                        std::span<const DiarizationSegment> segments) {
  std::vector<DiarizationSegment> sorted(segments.begin(), segments.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.start_s != b.start_s) return a.start_s < b.start_s;
    return a.speaker < b.speaker;
  });
  std::span<const DiarizationSegment> segs(sorted);
  auto prefix_end = prefix_max_end(segs, [](const DiarizationSegment& s) { return s.end_s; });

  std::vector<WordRecord> out(words.begin(), words.end());
  std::vector<std::size_t> candidates;
  std::vector<double> cuts;
  for (auto& w : out) {
    w.speaker.reset();
    const double a = w.start_s;
    const double b = w.end_s;

    candidates.clear();
    for (std::size_t i = first_reaching(prefix_end, a); i < segs.size(); ++i) {
      const auto& s = segs[i];
      if (b > a ? s.start_s >= b : s.start_s > a) break;
      const bool touches = b > a ? (s.end_s > a) : (s.start_s <= a && a < s.end_s);
      if (touches) candidates.push_back(i);
    }
    if (candidates.empty()) continue;

    // Credited time per candidate (candidates are in start order already).
    std::vector<double> credit(candidates.size(), 0.0);
    if (b > a) {
      cuts.assign({a, b});
      for (std::size_t c : candidates) {
        if (segs[c].start_s > a && segs[c].start_s < b) cuts.push_back(segs[c].start_s);
        if (segs[c].end_s > a && segs[c].end_s < b) cuts.push_back(segs[c].end_s);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double x = cuts[k];
        const double y = cuts[k + 1];
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          const auto& s = segs[candidates[c]];
          if (s.start_s <= x && s.end_s >= y) {
            credit[c] += y - x;
            break;
          }
        }
      }
    } else {
      credit[0] = 1.0;
    }

    // Sum per speaker, remembering first appearance order.
    std::vector<std::pair<std::string, double>> per_speaker;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::string& label = segs[candidates[c]].speaker;
      auto it = std::find_if(per_speaker.begin(), per_speaker.end(),
                             [&](const auto& p) { return p.first == label; });
      if (it == per_speaker.end()) {
        per_speaker.emplace_back(label, credit[c]);
      } else {
        it->second += credit[c];
      }
    }
    const std::pair<std::string, double>* best = nullptr;
    for (const auto& p : per_speaker) {
      if (p.second <= 0.0) continue;
      if (best == nullptr || p.second > best->second + kOverlapTolerance) best = &p;
    }
    if (best != nullptr) w.speaker = best->first;
  }
  return out;
}

SpeakerFilterResult filter_minor_speakers(std::span<const WordRecord> words, double min_share) {
  std::map<std::string, double> time;
  double total = 0.0;
  for (const auto& w : words) {
    if (!w.speaker) continue;
    time[*w.speaker] += w.duration();
    total += w.duration();
  }

  SpeakerFilterResult result;
  for (const auto& [label, t] : time) {
    // Small slack so a share that is exactly min_share survives rounding.
    const bool minor = total > 0.0 && t / total < min_share - 1e-12;
    (minor ? result.removed : result.retained).push_back(label);
  }
  result.words.assign(words.begin(), words.end());
  for (auto& w : result.words) {
    if (w.speaker && std::binary_search(result.removed.begin(), result.removed.end(),
                                        *w.speaker)) {
      w.speaker.reset();
    }
  }
  return result;
}

std::vector<Turn> segment_turns(std::span<const WordRecord> words) {
  std::vector<Turn> turns;
  struct Accum {
    std::size_t n = 0;
    double f0 = 0.0;
    double f1 = 0.0;
    Mfcc mfcc{};
  } acc;

  auto close = [&] {
    if (turns.empty()) return;
    Turn& t = turns.back();
    if (acc.n > 0) {
      const double n = static_cast<double>(acc.n);
      Prosody p{acc.f0 / n, acc.f1 / n, {}};
      for (std::size_t k = 0; k < 4; ++k) p.mfcc[k] = acc.mfcc[k] / n;
      t.prosody = p;
    }
    acc = Accum{};
  };

  for (std::size_t i = 0; i < words.size(); ++i) {
    const WordRecord& w = words[i];
    if (!w.speaker) continue;
    if (turns.empty() || turns.back().speaker != *w.speaker) {
      close();
      Turn t;
      t.turn_id = static_cast<int>(turns.size());
      t.speaker = *w.speaker;
      t.start_s = w.start_s;
      t.end_s = w.end_s;
      t.word_begin = i;
      turns.push_back(std::move(t));
    } else {
      turns.back().text.push_back(' ');
    }
    Turn& t = turns.back();
    t.text.append(w.token);
    t.end_s = std::max(t.end_s, w.end_s);
    t.word_end = i + 1;
    if (w.has_prosody()) {
      ++acc.n;
      acc.f0 += *w.f0_mean;
      acc.f1 += *w.f1_mean;
      for (std::size_t k = 0; k < 4; ++k) acc.mfcc[k] += (*w.mfcc_mean)[k];
    }
  }
  close();
  return turns;
}

std::optional<std::string> map_host_voice(std::span<const Turn> turns,
                                          std::string_view host_name) {
  auto host = text::normalize_words(host_name);
  if (host.size() != 2) return std::nullopt;
  for (const auto& t : turns) {
    auto tokens = text::normalize_words(t.text);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      if (tokens[i] == host[0] && tokens[i + 1] == host[1]) return t.speaker;
    }
  }
  return std::nullopt;
}

std::vector<ProsodicFrame> read_frames_csv(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  const std::size_t start = table.column("window_start_s");
  const std::size_t f0 = table.column("f0");
  const std::size_t f1 = table.column("f1");
  const std::array<std::size_t, 4> mfcc = {table.column("mfcc1"), table.column("mfcc2"),
                                           table.column("mfcc3"), table.column("mfcc4")};
  std::optional<std::size_t> end;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "window_end_s") end = i;
  }
  std::vector<ProsodicFrame> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ProsodicFrame frame;
    frame.window_start_s = parse_double(row[start], path, r);
    frame.window_end_s =
        end ? parse_double(row[*end], path, r) : frame.window_start_s + kFrameLength;
    frame.f0 = parse_double(row[f0], path, r);
    frame.f1 = parse_double(row[f1], path, r);
    for (std::size_t k = 0; k < 4; ++k) frame.mfcc[k] = parse_double(row[mfcc[k]], path, r);
    out.push_back(frame);
  }
  return out;
}

std::vector<DiarizationSegment> read_segments_csv(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  const std::size_t speaker = table.column("speaker");
  const std::size_t start = table.column("start_s");
  const std::size_t end = table.column("end_s");
  std::vector<DiarizationSegment> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    DiarizationSegment s{row[speaker], parse_double(row[start], path, r),
                         parse_double(row[end], path, r)};
    if (!(s.end_s > s.start_s)) {
      throw ParseError(path.string() + ": segment end not after start on line " +
                           std::to_string(r + 2),
                       r + 2);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<WordRecord> read_words_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<WordRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fail = [&](const std::string& why) {
      return ParseError(path.string() + ": " + why + " on line " + std::to_string(line_no),
                        line_no);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("malformed JSON");
    }
    if (!j.is_object() || !j.contains("token") || !j["token"].is_string() ||
        !j.contains("start_s") || !j["start_s"].is_number() || !j.contains("end_s") ||
        !j["end_s"].is_number()) {
      throw fail("word needs token, start_s and end_s");
    }
    WordRecord w;
    w.token = j["token"].get<std::string>();
    w.start_s = j["start_s"].get<double>();
    w.end_s = j["end_s"].get<double>();
    if (!std::isfinite(w.start_s) || !std::isfinite(w.end_s) || w.end_s < w.start_s) {
      throw fail("bad word times");
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace podcorpus::turns
