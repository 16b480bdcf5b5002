#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace infwalk {

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) edges.push_back({u, (u + 1) % n, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

/// Triangle 0-1-2 with pendant edge 2-3.
inline Graph triangle_with_pendant() {
  return Graph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}});
}

/// G(n, p); when `weighted`, weights are uniform in [0.5, 2).
inline Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool weighted = false) {
  Rng rng(substream_seed(seed, {0x65726772ULL}));
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) edges.push_back({u, v, weighted ? 0.5 + 1.5 * uniform01(rng) : 1.0});
  return Graph::from_edges(n, std::move(edges));
}

/// G(n, p) conditioned on walkability by rejection over derived seeds.
inline Graph random_walkable_graph(std::size_t n, double p, std::uint64_t seed, bool weighted = false) {
  for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
    auto g = erdos_renyi(n, p, substream_seed(seed, {attempt}), weighted);
    if (!check_walkable(g)) return g;
  }
  throw Error(ErrorKind::Usage, "generator.walkable", "no walkable G(n, p) sample found; increase p");
}

/// Stochastic block model with one label per node (its block).
inline LabeledDataset stochastic_block_model(const std::vector<std::size_t>& block_sizes, double p_in, double p_out,
                                             std::uint64_t seed) {
  std::vector<int> block;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) block.insert(block.end(), block_sizes[b], static_cast<int>(b));
  const std::size_t n = block.size();
  Rng rng(substream_seed(seed, {0x73626dULL}));
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < (block[u] == block[v] ? p_in : p_out)) edges.push_back({u, v, 1.0});
  LabeledDataset data;
  data.graph = Graph::from_edges(n, std::move(edges));
  data.num_labels = static_cast<int>(block_sizes.size());
  for (int b = 0; b < data.num_labels; ++b) data.label_names.push_back(std::to_string(b));
  for (NodeId i = 0; i < n; ++i) data.labels.push_back({block[i]});
  return data;
}

}  // namespace infwalk
