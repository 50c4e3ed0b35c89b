#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "podcorpus/corpus_model.hpp"

namespace podcorpus::network {

struct NameStats {
  std::map<std::string, std::size_t> first_counts;
  std::map<std::string, std::size_t> last_counts;
  std::size_t total_first = 0;
  std::size_t total_last = 0;

  // Counts the (lowercased) first and last token of a two-token name.
  void add(std::string_view name);
};

// Frequencies over distinct identified names (any label) in the corpus.
NameStats build_name_stats(std::span<const EpisodeRecord> episodes);

// p(first) * p(last). Throws std::invalid_argument for names that are not
// two tokens or whose tokens are absent from `stats`.
double name_probability(std::string_view name, const NameStats& stats);

struct BipartiteGraph {
  std::set<std::string> podcasts;
  std::set<std::string> guests;  // lowercased names
  std::set<std::pair<std::string, std::string>> edges;  // (podcast, guest)
  std::map<std::string, std::string> display_name;      // guest key -> surface
};

struct BipartiteOptions {
  // Guests need p(name) strictly below this quantile of guest-name
  // probabilities. 0.5 gives the lower median.
  double name_probability_quantile = 0.5;
};

struct BipartiteReport {
  std::size_t guest_names = 0;         // distinct names labeled Guest
  std::size_t excluded_common = 0;     // distinct names dropped by p(name)
  std::size_t excluded_as_host = 0;    // (podcast, guest) pairs dropped
  double probability_threshold = 0.0;
};

// Lower quantile: the ceil(q*n)-th smallest value.
double lower_quantile(std::vector<double> values, double q);

BipartiteGraph build_bipartite(std::span<const EpisodeRecord> episodes, const NameStats& stats,
                               const BipartiteOptions& options = {},
                               BipartiteReport* report = nullptr);

struct GuestEdge {
  std::size_t a = 0;  // node indices, a < b
  std::size_t b = 0;
  std::set<std::string> shared_guests;
};

// One-mode podcast network. Nodes are sorted podcast ids.
struct GuestGraph {
  std::vector<std::string> nodes;
  std::vector<std::string> categories;
  std::vector<GuestEdge> edges;  // sorted by (a, b)
  std::vector<std::size_t> degree;

  std::size_t edge_count() const noexcept { return edges.size(); }
  bool adjacent(std::size_t i, std::size_t j) const;
  // Builds a graph from explicit edges (for fixtures and bindings).
  static GuestGraph from_edges(std::size_t node_count,
                               std::span<const std::pair<std::size_t, std::size_t>> edges);
};

// `categories` maps podcast id to category; missing podcasts are "unknown".
GuestGraph project_one_mode(const BipartiteGraph& bipartite,
                            const std::map<std::string, std::string>& categories = {});

// Community id per node.
struct Partition {
  std::vector<std::size_t> community;
};

// Newman modularity of an unweighted graph. Throws std::invalid_argument when
// the graph has no edges or the partition size differs from the node count.
double modularity(const GuestGraph& graph, const Partition& partition);

// Q of the binary partition {in c, not in c} for every category present on a
// node plus any listed in `extra`.
std::map<std::string, double> category_modularity(const GuestGraph& graph,
                                                  std::span<const std::string> extra = {});

// CSV exports.
void write_edges_csv(const std::filesystem::path& path, const GuestGraph& graph,
                     const BipartiteGraph& bipartite);
void write_nodes_csv(const std::filesystem::path& path, const GuestGraph& graph);
void write_modularity_csv(const std::filesystem::path& path, const GuestGraph& graph,
                          const std::map<std::string, double>& q);

}  // namespace podcorpus::network
