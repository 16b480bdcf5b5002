#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace infwalk {

using NodeId = std::size_t;

struct Edge {
  NodeId u;
  NodeId v;
  double weight;
};

struct Neighbor {
  NodeId node;
  double weight;
};

/// Undirected weighted graph without self-loops. Edges are stored once with
/// u < v; duplicate edges are merged by summing weights. Immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Canonicalizes `edges` over nodes [0, n). `names`, when non-empty, gives the
  /// original identifier of every node.
  static Graph from_edges(std::size_t n, std::vector<Edge> edges, std::vector<std::string> names = {}) {
    if (!names.empty() && names.size() != n)
      throw Error(ErrorKind::Usage, "graph.names", "name map size does not match node count");
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n)
        throw Error(ErrorKind::Validation, "graph.node_range", "edge endpoint outside [0, n)");
      if (e.u == e.v)
        throw Error(ErrorKind::Validation, "graph.self_loop", "self-loop on node " + std::to_string(e.u));
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw Error(ErrorKind::Validation, "graph.weight", "edge weight must be positive and finite");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    std::vector<Edge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
      if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
        merged.back().weight += e.weight;
      else
        merged.push_back(e);
    }

    Graph g;
    g.n_ = n;
    g.edges_ = std::move(merged);
    g.names_ = std::move(names);
    g.degree_.assign(n, 0.0);
    std::vector<std::size_t> counts(n + 1, 0);
    for (const auto& e : g.edges_) {
      g.degree_[e.u] += e.weight;
      g.degree_[e.v] += e.weight;
      ++counts[e.u + 1];
      ++counts[e.v + 1];
    }
    g.volume_ = std::accumulate(g.degree_.begin(), g.degree_.end(), 0.0);
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    g.offsets_ = counts;
    g.adjacency_.resize(2 * g.edges_.size());
    auto fill = counts;
    for (const auto& e : g.edges_) {
      g.adjacency_[fill[e.u]++] = {e.v, e.weight};
      g.adjacency_[fill[e.v]++] = {e.u, e.weight};
    }
    return g;
  }

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& degree() const noexcept { return degree_; }
  double volume() const noexcept { return volume_; }
  bool has_names() const noexcept { return !names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::string name(NodeId i) const { return names_.empty() ? std::to_string(i) : names_[i]; }

  /// Neighbors of `i`, ordered by node id.
  std::span<const Neighbor> neighbors(NodeId i) const {
    return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  Eigen::VectorXd degree_vector() const { return Eigen::Map<const Eigen::VectorXd>(degree_.data(), n_); }

  Eigen::MatrixXd adjacency_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& e : edges_) {
      a(e.u, e.v) = e.weight;
      a(e.v, e.u) = e.weight;
    }
    return a;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> degree_;
  double volume_ = 0.0;
  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

/// Graph plus per-node label sets with label ids dense in [0, num_labels).
struct LabeledDataset {
  Graph graph;
  std::vector<std::vector<int>> labels;
  int num_labels = 0;
  std::vector<std::string> label_names;
};

namespace detail {

inline bool is_unsigned_integer(const std::string& s) {
  if (s.empty() || s.size() > 18) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Assigns dense ids to tokens: numeric order when every token is a
/// non-negative integer, first-appearance order otherwise.
inline std::unordered_map<std::string, std::size_t> dense_ids(const std::vector<std::string>& first_seen,
                                                              std::vector<std::string>& ordered) {
  ordered = first_seen;
  if (std::all_of(ordered.begin(), ordered.end(), is_unsigned_integer)) {
    std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
      return std::stoull(a) < std::stoull(b);
    });
  }
  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < ordered.size(); ++i) ids.emplace(ordered[i], i);
  return ids;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

inline bool skip_line(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

inline Error parse_error(const char* code, std::size_t line_no, const std::string& what) {
  return Error(ErrorKind::Validation, code, "line " + std::to_string(line_no) + ": " + what);
}

inline std::optional<double> parse_double(const std::string& s) {
  double value = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Reads "u v [w]" lines; '#' lines and blank lines are skipped. Node tokens are
/// arbitrary; dense ids follow numeric order when all tokens are integers.
inline Graph load_edge_list(std::istream& in) {
  struct Raw {
    std::string u, v;
    double w;
  };
  std::vector<Raw> raw;
  std::vector<std::string> first_seen;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 2 && tok.size() != 3)
      throw detail::parse_error("parse.token", line_no, "expected 'u v [w]'");
    double w = 1.0;
    if (tok.size() == 3) {
      auto parsed = detail::parse_double(tok[2]);
      if (!parsed) throw detail::parse_error("parse.token", line_no, "malformed weight '" + tok[2] + "'");
      w = *parsed;
      if (!(w > 0.0) || !std::isfinite(w))
        throw detail::parse_error("parse.weight", line_no, "weight must be positive");
    }
    if (tok[0] == tok[1]) throw detail::parse_error("parse.self_loop", line_no, "self-loop on '" + tok[0] + "'");
    for (int k = 0; k < 2; ++k) {
      if (seen.emplace(tok[k], true).second) first_seen.push_back(tok[k]);
    }
    raw.push_back({tok[0], tok[1], w});
  }
  std::vector<std::string> names;
  auto ids = detail::dense_ids(first_seen, names);
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& r : raw) edges.push_back({ids.at(r.u), ids.at(r.v), r.w});
  const std::size_t n = names.size();
  return Graph::from_edges(n, std::move(edges), std::move(names));
}

/// Reads "node label [label ...]" lines against the node names of `g`.
/// Lines naming nodes absent from `g` are ignored.
inline LabeledDataset load_labels(std::istream& in, const Graph& g) {
  std::unordered_map<std::string, NodeId> node_ids;
  for (NodeId i = 0; i < g.num_nodes(); ++i) node_ids.emplace(g.name(i), i);

  std::vector<std::pair<NodeId, std::vector<std::string>>> rows;
  std::vector<std::string> first_seen;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    auto tok = detail::split_ws(line);
    // Every label token is registered even when its node is missing, so label
    // ids do not depend on which nodes survived preprocessing.
    for (std::size_t k = 1; k < tok.size(); ++k)
      if (seen.emplace(tok[k], true).second) first_seen.push_back(tok[k]);
    auto it = node_ids.find(tok[0]);
    if (it == node_ids.end()) continue;
    rows.emplace_back(it->second, std::vector<std::string>(tok.begin() + 1, tok.end()));
  }
  LabeledDataset data;
  auto label_ids = detail::dense_ids(first_seen, data.label_names);
  data.graph = g;
  data.num_labels = static_cast<int>(data.label_names.size());
  data.labels.assign(g.num_nodes(), {});
  for (auto& [node, names] : rows)
    for (const auto& name : names) data.labels[node].push_back(static_cast<int>(label_ids.at(name)));
  for (auto& set : data.labels) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  return data;
}

/// Connected components by BFS; component ids are assigned in order of the
/// smallest node they contain.
inline std::vector<std::size_t> connected_components(const Graph& g, std::size_t* count = nullptr) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(g.num_nodes(), unset);
  std::size_t next = 0;
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (const auto& nb : g.neighbors(queue[head]))
        if (comp[nb.node] == unset) {
          comp[nb.node] = next;
          queue.push_back(nb.node);
        }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

/// Subgraph induced on `keep` (ascending node ids); `kept` receives the
/// original ids of the new nodes.
inline Graph induced_subgraph(const Graph& g, const std::vector<bool>& keep, std::vector<NodeId>* kept = nullptr) {
  std::vector<NodeId> new_id(g.num_nodes(), 0);
  std::vector<NodeId> old_ids;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    if (keep[i]) {
      new_id[i] = old_ids.size();
      old_ids.push_back(i);
    }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (keep[e.u] && keep[e.v]) edges.push_back({new_id[e.u], new_id[e.v], e.weight});
  std::vector<std::string> names;
  names.reserve(old_ids.size());
  for (auto i : old_ids) names.push_back(g.name(i));
  auto sub = Graph::from_edges(old_ids.size(), std::move(edges), std::move(names));
  if (kept) *kept = std::move(old_ids);
  return sub;
}

/// Largest connected component; equal sizes resolve to the component holding
/// the smallest node id.
inline Graph largest_connected_component(const Graph& g, std::vector<NodeId>* kept = nullptr) {
  if (g.num_nodes() == 0) throw Error(ErrorKind::Validation, "graph.empty", "graph has no nodes");
  std::size_t count = 0;
  auto comp = connected_components(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  // Component ids are ordered by smallest member, so the first maximum wins ties.
  const auto best = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<bool> keep(g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) keep[i] = comp[i] == best;
  return induced_subgraph(g, keep, kept);
}

inline LabeledDataset largest_connected_component(const LabeledDataset& data) {
  std::vector<NodeId> kept;
  LabeledDataset out;
  out.graph = largest_connected_component(data.graph, &kept);
  out.num_labels = data.num_labels;
  out.label_names = data.label_names;
  out.labels.reserve(kept.size());
  for (auto i : kept) out.labels.push_back(data.labels[i]);
  return out;
}

enum class WalkIssue { Empty, IsolatedNode, Disconnected, Bipartite };

/// Why a graph cannot host the random-walk constructions, with a witness.
struct WalkabilityReport {
  explicit WalkabilityReport(WalkIssue i) : issue(i) {}

  WalkIssue issue;
  NodeId isolated_node = 0;                 // IsolatedNode
  std::vector<std::size_t> component_sizes; // Disconnected
  std::vector<int> coloring;                // Bipartite: a proper 2-coloring

  std::string code() const {
    switch (issue) {
      case WalkIssue::Empty: return "graph.empty";
      case WalkIssue::IsolatedNode: return "graph.isolated_node";
      case WalkIssue::Disconnected: return "graph.disconnected";
      case WalkIssue::Bipartite: return "graph.bipartite";
    }
    return "graph.invalid";
  }

  std::string message() const {
    switch (issue) {
      case WalkIssue::Empty: return "graph has no nodes";
      case WalkIssue::IsolatedNode: return "node " + std::to_string(isolated_node) + " has zero degree";
      case WalkIssue::Disconnected: {
        std::string s = "graph has " + std::to_string(component_sizes.size()) + " components of sizes";
        for (auto c : component_sizes) s += " " + std::to_string(c);
        return s;
      }
      case WalkIssue::Bipartite: return "graph is bipartite (a proper 2-coloring exists)";
    }
    return "invalid graph";
  }
};

/// Empty optional iff `g` is connected, non-bipartite and has no zero-degree node.
inline std::optional<WalkabilityReport> check_walkable(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return WalkabilityReport{WalkIssue::Empty};
  for (NodeId i = 0; i < n; ++i)
    if (g.degree()[i] <= 0.0) {
      WalkabilityReport r{WalkIssue::IsolatedNode};
      r.isolated_node = i;
      return r;
    }
  std::size_t count = 0;
  auto comp = connected_components(g, &count);
  if (count > 1) {
    WalkabilityReport r{WalkIssue::Disconnected};
    r.component_sizes.assign(count, 0);
    for (auto c : comp) ++r.component_sizes[c];
    return r;
  }
  std::vector<int> color(n, -1);
  color[0] = 0;
  std::vector<NodeId> queue{0};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (const auto& nb : g.neighbors(u)) {
      if (color[nb.node] < 0) {
        color[nb.node] = 1 - color[u];
        queue.push_back(nb.node);
      } else if (color[nb.node] == color[u]) {
        return std::nullopt;  // odd cycle
      }
    }
  }
  WalkabilityReport r{WalkIssue::Bipartite};
  r.coloring = std::move(color);
  return r;
}

/// Throws Error(Validation) with the issue code when `g` is not walkable.
inline void validate_walkable(const Graph& g) {
  if (auto report = check_walkable(g)) throw Error(ErrorKind::Validation, report->code(), report->message());
}

}  // namespace infwalk
