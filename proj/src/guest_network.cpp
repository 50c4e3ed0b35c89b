#include "podcorpus/guest_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "podcorpus/csv.hpp"
#include "podcorpus/text.hpp"

namespace podcorpus::network {

namespace {

std::pair<std::string, std::string> split_name(std::string_view name) {
  auto tokens = text::split_whitespace(name);
  if (tokens.size() != 2) {
    throw std::invalid_argument("name '" + std::string(name) + "' is not two tokens");
  }
  return {text::to_lower(tokens[0]), text::to_lower(tokens[1])};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void NameStats::add(std::string_view name) {
  auto [first, last] = split_name(name);
  ++first_counts[first];
  ++last_counts[last];
  ++total_first;
  ++total_last;
}

NameStats build_name_stats(std::span<const EpisodeRecord> episodes) {
  std::set<std::string> names;
  for (const auto& ep : episodes) {
    for (const auto& r : ep.roles) {
      if (is_two_token_name(r.name)) names.insert(text::to_lower(r.name));
    }
  }
  NameStats stats;
  for (const auto& n : names) stats.add(n);
  return stats;
}

double name_probability(std::string_view name, const NameStats& stats) {
  auto [first, last] = split_name(name);
  auto f = stats.first_counts.find(first);
  auto l = stats.last_counts.find(last);
  if (f == stats.first_counts.end() || l == stats.last_counts.end() || stats.total_first == 0 ||
      stats.total_last == 0) {
    throw std::invalid_argument("name_probability: '" + std::string(name) +
                                "' has a token missing from the name statistics");
  }
  return (static_cast<double>(f->second) / static_cast<double>(stats.total_first)) *
         (static_cast<double>(l->second) / static_cast<double>(stats.total_last));
}

double lower_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("lower_quantile: no values");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("lower_quantile: q must be in (0,1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

BipartiteGraph build_bipartite(std::span<const EpisodeRecord> episodes, const NameStats& stats,
                               const BipartiteOptions& options, BipartiteReport* report) {
  BipartiteGraph g;
  std::map<std::string, std::set<std::string>> hosts_by_podcast;
  std::set<std::pair<std::string, std::string>> guest_pairs;
  for (const auto& ep : episodes) {
    const std::string& podcast = ep.podcast.podcast_id;
    g.podcasts.insert(podcast);
    for (const auto& r : ep.roles) {
      if (!is_two_token_name(r.name)) continue;
      std::string key = text::to_lower(r.name);
      if (r.label == RoleLabel::Host) {
        hosts_by_podcast[podcast].insert(key);
      } else if (r.label == RoleLabel::Guest) {
        guest_pairs.emplace(podcast, key);
        g.display_name.try_emplace(key, r.name);
      }
    }
  }

  std::map<std::string, double> probability;
  for (const auto& [podcast, key] : guest_pairs) {
    if (!probability.contains(key)) probability[key] = name_probability(key, stats);
  }
  BipartiteReport local;
  local.guest_names = probability.size();
  if (!probability.empty()) {
    std::vector<double> values;
    values.reserve(probability.size());
    for (const auto& [key, p] : probability) values.push_back(p);
    local.probability_threshold = lower_quantile(std::move(values),
                                                 options.name_probability_quantile);
  }
  for (const auto& [key, p] : probability) {
    if (!(p < local.probability_threshold)) ++local.excluded_common;
  }

  for (const auto& [podcast, key] : guest_pairs) {
    if (!(probability.at(key) < local.probability_threshold)) continue;
    auto hosts = hosts_by_podcast.find(podcast);
    if (hosts != hosts_by_podcast.end() && hosts->second.contains(key)) {
      ++local.excluded_as_host;
      continue;
    }
    g.guests.insert(key);
    g.edges.emplace(podcast, key);
  }
  std::erase_if(g.display_name, [&](const auto& kv) { return !g.guests.contains(kv.first); });
  if (report != nullptr) *report = local;
  return g;
}

bool GuestGraph::adjacent(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  auto key = std::minmax(i, j);
  auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const GuestEdge& e, auto k) {
    return std::pair(e.a, e.b) < std::pair(k.first, k.second);
  });
  return it != edges.end() && it->a == key.first && it->b == key.second;
}

GuestGraph GuestGraph::from_edges(std::size_t node_count,
                                  std::span<const std::pair<std::size_t, std::size_t>> edges) {
  GuestGraph g;
  g.nodes.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) g.nodes[i] = std::to_string(i);
  g.categories.assign(node_count, "unknown");
  g.degree.assign(node_count, 0);
  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (auto [a, b] : edges) {
    if (a >= node_count || b >= node_count) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    unique.insert(std::minmax(a, b));
  }
  for (auto [a, b] : unique) {
    g.edges.push_back(GuestEdge{a, b, {}});
    ++g.degree[a];
    ++g.degree[b];
  }
  return g;
}

GuestGraph project_one_mode(const BipartiteGraph& bipartite,
                            const std::map<std::string, std::string>& categories) {
  std::map<std::string, std::vector<std::string>> podcasts_of_guest;
  for (const auto& [podcast, guest] : bipartite.edges) podcasts_of_guest[guest].push_back(podcast);

  std::map<std::pair<std::string, std::string>, std::set<std::string>> pairs;
  for (const auto& [guest, podcasts] : podcasts_of_guest) {
    // podcasts are already sorted: edges iterate in (podcast, guest) order.
    for (std::size_t i = 0; i < podcasts.size(); ++i) {
      for (std::size_t j = i + 1; j < podcasts.size(); ++j) {
        pairs[{podcasts[i], podcasts[j]}].insert(guest);
      }
    }
  }

  std::set<std::string> node_set;
  for (const auto& [key, guests] : pairs) {
    node_set.insert(key.first);
    node_set.insert(key.second);
  }
  GuestGraph g;
  g.nodes.assign(node_set.begin(), node_set.end());
  g.degree.assign(g.nodes.size(), 0);
  for (const auto& id : g.nodes) {
    auto it = categories.find(id);
    g.categories.push_back(it == categories.end() ? "unknown" : it->second);
  }
  auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), id) -
                                    g.nodes.begin());
  };
  for (auto& [key, guests] : pairs) {
    GuestEdge e{index_of(key.first), index_of(key.second), std::move(guests)};
    ++g.degree[e.a];
    ++g.degree[e.b];
    g.edges.push_back(std::move(e));
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const GuestEdge& x, const GuestEdge& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
  return g;
}

double modularity(const GuestGraph& graph, const Partition& partition) {
  if (partition.community.size() != graph.nodes.size()) {
    throw std::invalid_argument("modularity: partition size does not match node count");
  }
  if (graph.edges.empty()) throw std::invalid_argument("modularity: graph has no edges");

  const double two_m = 2.0 * static_cast<double>(graph.edges.size());
  // Per community: internal edge count and total degree.
  std::map<std::size_t, std::pair<double, double>> blocks;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    blocks[partition.community[i]].second += static_cast<double>(graph.degree[i]);
  }
  for (const auto& e : graph.edges) {
    if (partition.community[e.a] == partition.community[e.b]) {
      blocks[partition.community[e.a]].first += 1.0;
    }
  }
  double q = 0.0;
  for (const auto& [c, block] : blocks) {
    const double frac = block.second / two_m;
    q += 2.0 * block.first / two_m - frac * frac;
  }
  return q;
}

std::map<std::string, double> category_modularity(const GuestGraph& graph,
                                                  std::span<const std::string> extra) {
  std::set<std::string> wanted(graph.categories.begin(), graph.categories.end());
  wanted.insert(extra.begin(), extra.end());
  std::map<std::string, double> out;
  Partition p;
  p.community.resize(graph.nodes.size());
  for (const auto& c : wanted) {
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      p.community[i] = graph.categories[i] == c ? 1 : 0;
    }
    out[c] = modularity(graph, p);
  }
  return out;
}

void write_edges_csv(const std::filesystem::path& path, const GuestGraph& graph,
                     const BipartiteGraph& bipartite) {
  auto out = open_out(path);
  csv::write_row(out, {"podcast_id_a", "podcast_id_b", "shared_guest_count", "guests"});
  for (const auto& e : graph.edges) {
    std::vector<std::string> names;
    for (const auto& g : e.shared_guests) {
      auto it = bipartite.display_name.find(g);
      names.push_back(it == bipartite.display_name.end() ? g : it->second);
    }
    csv::write_row(out, {graph.nodes[e.a], graph.nodes[e.b],
                         std::to_string(e.shared_guests.size()), text::join(names, "|")});
  }
}

void write_nodes_csv(const std::filesystem::path& path, const GuestGraph& graph) {
  auto out = open_out(path);
  csv::write_row(out, {"podcast_id", "category", "degree"});
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    csv::write_row(out, {graph.nodes[i], graph.categories[i], std::to_string(graph.degree[i])});
  }
}

void write_modularity_csv(const std::filesystem::path& path, const GuestGraph& graph,
                          const std::map<std::string, double>& q) {
  auto out = open_out(path);
  csv::write_row(out, {"category", "nodes", "modularity"});
  for (const auto& [category, value] : q) {
    auto n = std::count(graph.categories.begin(), graph.categories.end(), category);
    csv::write_row(out, {category, std::to_string(n), format_double(value)});
  }
}

}  // namespace podcorpus::network
