#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "infwalk/generators.hpp"

namespace suite {

/// Seeded walkable Erdos-Renyi graph with n in [5, 50]; odd seeds are weighted.
inline infwalk::Graph random_graph(std::uint64_t seed) {
  const std::size_t n = 5 + (seed * 7919) % 46;
  const double p = std::min(0.9, 3.0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
  return infwalk::random_walkable_graph(n, p, seed, seed % 2 == 1);
}

}  // namespace suite
